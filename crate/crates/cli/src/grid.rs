use hothand::ProbLiteral;

/// Ordered set of integers from a range or list literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSet(pub Vec<u64>);

#[derive(Debug, Clone, PartialEq)]
pub struct ProbList(pub Vec<ProbLiteral>);

/// `a..b` and `a..=b` are both inclusive; `b < a` gives the empty set.
pub fn parse_int_set(s: &str) -> Result<IntSet, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(IntSet(Vec::new()));
    }
    let int = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| format!("{t:?} is not a nonnegative integer"))
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi) = (int(lo)?, int(hi)?);
        return Ok(IntSet((lo..=hi).collect()));
    }
    s.split(',').map(int).collect::<Result<Vec<_>, _>>().map(IntSet)
}

pub fn parse_prob_list(s: &str) -> Result<ProbList, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(ProbList(Vec::new()));
    }
    s.split(',')
        .map(|t| t.parse::<ProbLiteral>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map(ProbList)
}
