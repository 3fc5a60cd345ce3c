//! Decompositions of the coordinate indices into disjoint groups.
//!
//! Indices are 0-based in memory; the textual form (`[[1,2],[3]]`) and all
//! diagnostics use 1-based indices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Largest dimension accepted by [`enumerate_all`].
pub const MAX_ENUMERATION_DIM: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    groups: Vec<Vec<usize>>,
}

/// First violated structural clause of a partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyGroup { group: usize },
    OutOfRange { index: usize },
    Overlap { index: usize },
    NotCovering { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGroup { group } => write!(f, "group {} is empty", group + 1),
            Violation::OutOfRange { index } => write!(f, "index {} is out of range", index + 1),
            Violation::Overlap { index } => write!(f, "index {} appears in more than one group", index + 1),
            Violation::NotCovering { index } => write!(f, "index {} is not covered", index + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub violation: Option<Violation>,
    /// Single-group partition: structurally valid but not a decomposition.
    pub trivial: bool,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }

    /// Valid and with at least two groups.
    pub fn is_decomposition(&self) -> bool {
        self.is_valid() && !self.trivial
    }
}

impl Partition {
    /// Builds a partition without checking it; see [`Partition::validate`].
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Self {
        Self { n, groups }
    }

    /// Builds and validates, normalizing to canonical order.
    pub fn checked(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let p = Self::new(n, groups);
        match p.validate().violation {
            Some(v) => Err(invalid(format!("invalid partition: {v}"))),
            None => Ok(p.canonical()),
        }
    }

    /// `{{1},…,{n}}`
    pub fn singletons(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| vec![i]).collect())
    }

    pub fn whole(n: usize) -> Self {
        Self::new(n, vec![(0..n).collect()])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn validate(&self) -> Validation {
        let mut seen = vec![false; self.n];
        let mut violation = None;
        'outer: for (g, group) in self.groups.iter().enumerate() {
            if group.is_empty() {
                violation = Some(Violation::EmptyGroup { group: g });
                break;
            }
            for &i in group {
                if i >= self.n {
                    violation = Some(Violation::OutOfRange { index: i });
                    break 'outer;
                }
                if seen[i] {
                    violation = Some(Violation::Overlap { index: i });
                    break 'outer;
                }
                seen[i] = true;
            }
        }
        if violation.is_none() {
            if let Some(i) = seen.iter().position(|s| !s) {
                violation = Some(Violation::NotCovering { index: i });
            }
        }
        Validation { violation, trivial: self.groups.len() == 1 }
    }

    /// Groups sorted internally and ordered by least element.
    pub fn canonical(&self) -> Self {
        let mut groups: Vec<Vec<usize>> = self
            .groups
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.sort_unstable();
                g
            })
            .collect();
        groups.sort_by_key(|g| g.first().copied().unwrap_or(usize::MAX));
        Self { n: self.n, groups }
    }

    /// Splits `groups[group_index]` into the two given parts.
    pub fn refine(&self, group_index: usize, left: &[usize], right: &[usize]) -> Result<Self> {
        let group = self
            .groups
            .get(group_index)
            .ok_or_else(|| invalid(format!("group index {group_index} out of range")))?;
        if left.is_empty() || right.is_empty() {
            return Err(invalid("both parts of a split must be nonempty"));
        }
        let mut a = left.to_vec();
        a.extend_from_slice(right);
        a.sort_unstable();
        let mut b = group.clone();
        b.sort_unstable();
        if a.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("split parts are not disjoint"));
        }
        if a != b {
            return Err(invalid("split parts do not cover the group exactly"));
        }
        let mut groups = self.groups.clone();
        groups[group_index] = left.to_vec();
        groups.insert(group_index + 1, right.to_vec());
        Ok(Self { n: self.n, groups })
    }

    /// Every group of `self` lies inside some group of `coarse`.
    pub fn is_refinement_of(&self, coarse: &Partition) -> bool {
        if self.n != coarse.n || !self.validate().is_valid() || !coarse.validate().is_valid() {
            return false;
        }
        let mut owner = vec![usize::MAX; coarse.n];
        for (g, group) in coarse.groups.iter().enumerate() {
            for &i in group {
                owner[i] = g;
            }
        }
        self.groups.iter().all(|g| g.iter().all(|&i| owner[i] == owner[g[0]]))
    }

    /// Copies `values` (one per index of group `g`, in group order) into `x`.
    pub fn splice(&self, g: usize, x: &mut [f64], values: &[f64]) {
        for (&i, v) in self.groups[g].iter().zip(values) {
            x[i] = *v;
        }
    }

    pub fn extract(&self, g: usize, x: &[f64]) -> Vec<f64> {
        self.groups[g].iter().map(|&i| x[i]).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (gi, g) in self.groups.iter().enumerate() {
            if gi > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (k, i) in g.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// Parses a 1-based literal such as `[[1,2],[3]]`. The dimension is the
/// largest index mentioned; use [`parse_partition`] to fix it explicitly.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let groups: Vec<Vec<usize>> = serde_json::from_str(s.trim())
            .map_err(|e| Error::Parse(format!("partition literal `{s}`: {e}")))?;
        if groups.iter().flatten().any(|&i| i == 0) {
            return Err(Error::Parse(format!("partition literal `{s}` uses 1-based indices")));
        }
        let n = groups.iter().flatten().copied().max().unwrap_or(0);
        Ok(Self::new(n, groups.into_iter().map(|g| g.into_iter().map(|i| i - 1).collect()).collect()))
    }
}

/// Parses a literal for a problem of dimension `n` and validates it.
pub fn parse_partition(s: &str, n: usize) -> Result<Partition> {
    let p: Partition = s.parse()?;
    Partition::checked(n, p.groups)
}

/// Number of set partitions of `n` labelled items with at least two groups,
/// i.e. Bell(n) − 1, from the Bell triangle.
pub fn count_partitions(n: usize) -> Result<BigUint> {
    if !(1..=64).contains(&n) {
        return Err(invalid(format!("count_partitions expects 1 <= n <= 64, got {n}")));
    }
    let mut row = vec![BigUint::from(1u32)];
    for _ in 1..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().cloned().unwrap());
        for v in &row {
            let value = next.last().unwrap() + v;
            next.push(value);
        }
        row = next;
    }
    Ok(row.last().unwrap() - 1u32)
}

/// All partitions of `{1,…,n}` with at least two groups, each once, in
/// canonical form, listed in restricted-growth-string order.
pub fn enumerate_all(n: usize) -> Result<Vec<Partition>> {
    if n > MAX_ENUMERATION_DIM {
        return Err(invalid(format!(
            "enumerate_all is limited to n <= {MAX_ENUMERATION_DIM}, got {n}"
        )));
    }
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    // rgs[i] = block of item i; rgs[0] = 0 and rgs[i] <= 1 + max(rgs[..i]).
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        if blocks >= 2 {
            let mut groups = vec![Vec::new(); blocks];
            for (i, &b) in rgs.iter().enumerate() {
                groups[b].push(i);
            }
            out.push(Partition::new(n, groups));
        }
        // advance to the next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            let prefix_max = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Seeded random permutation of the indices cut into `k` contiguous blocks
/// whose sizes differ by at most one.
pub fn default_decompose(n: usize, k: usize, seed: u64) -> Result<Partition> {
    if k < 2 || k > n {
        return Err(invalid(format!("default_decompose needs 2 <= k <= n, got n={n}, k={k}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut groups = Vec::with_capacity(k);
    let mut start = 0;
    for b in 0..k {
        let len = n / k + usize::from(b < n % k);
        groups.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(Partition::new(n, groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str, n: usize) -> Partition {
        let p: Partition = s.parse().unwrap();
        Partition::new(n, p.groups)
    }

    #[test]
    fn validate_examples() {
        assert!(lit("[[1,2],[3]]", 3).validate().is_decomposition());
        assert_eq!(
            lit("[[1,2],[2,3]]", 3).validate().violation,
            Some(Violation::Overlap { index: 1 })
        );
        assert_eq!(
            lit("[[1],[3]]", 3).validate().violation,
            Some(Violation::NotCovering { index: 1 })
        );
        let trivial = lit("[[1,2,3]]", 3).validate();
        assert!(trivial.is_valid() && trivial.trivial && !trivial.is_decomposition());
        assert_eq!(
            Partition::new(2, vec![vec![0], vec![]]).validate().violation,
            Some(Violation::EmptyGroup { group: 1 })
        );
        assert_eq!(
            Partition::new(2, vec![vec![0], vec![1, 2]]).validate().violation,
            Some(Violation::OutOfRange { index: 2 })
        );
    }

    #[test]
    fn counts() {
        assert_eq!(count_partitions(25).unwrap().to_string(), "4638590332229999352");
        assert_eq!(count_partitions(3).unwrap(), BigUint::from(4u32));
        assert_eq!(count_partitions(2).unwrap(), BigUint::from(1u32));
        assert_eq!(count_partitions(1).unwrap(), BigUint::from(0u32));
        assert!(count_partitions(0).is_err());
        assert!(count_partitions(65).is_err());
        assert!(count_partitions(64).is_ok());
    }

    #[test]
    fn refine_examples() {
        let p = lit("[[1,2],[3]]", 3);
        let q = p.refine(0, &[0], &[1]).unwrap();
        assert_eq!(q.to_string(), "[[1],[2],[3]]");
        assert!(q.is_refinement_of(&p));
        assert!(!p.is_refinement_of(&q));
        assert!(p.refine(0, &[0], &[0, 1]).is_err());
        assert!(p.refine(0, &[0], &[]).is_err());
        assert!(p.refine(0, &[0], &[2]).is_err());
        assert!(p.refine(5, &[0], &[1]).is_err());
    }

    #[test]
    fn repeated_refinement_reaches_singletons() {
        let mut p = Partition::whole(6);
        while let Some(g) = p.groups().iter().position(|g| g.len() > 1) {
            let group = p.group(g).to_vec();
            p = p.refine(g, &group[..1], &group[1..]).unwrap();
        }
        assert_eq!(p.canonical(), Partition::singletons(6));
    }

    #[test]
    fn enumerate_small() {
        let all = enumerate_all(3).unwrap();
        let text: Vec<String> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(text, ["[[1,2],[3]]", "[[1,3],[2]]", "[[1],[2,3]]", "[[1],[2],[3]]"]);
        assert_eq!(enumerate_all(2).unwrap(), vec![Partition::singletons(2)]);
        assert!(enumerate_all(1).unwrap().is_empty());
        assert!(enumerate_all(11).is_err());
    }

    #[test]
    fn enumeration_matches_count() {
        for n in 1..=8 {
            let all = enumerate_all(n).unwrap();
            assert_eq!(BigUint::from(all.len()), count_partitions(n).unwrap(), "n={n}");
            for p in &all {
                assert!(p.validate().is_decomposition());
                assert_eq!(&p.canonical(), p);
            }
            let unique: std::collections::HashSet<_> = all.iter().collect();
            assert_eq!(unique.len(), all.len());
        }
    }

    #[test]
    fn decompose_sizes() {
        let p = default_decompose(6, 3, 1).unwrap();
        assert!(p.groups().iter().all(|g| g.len() == 2));
        let mut sizes: Vec<usize> = default_decompose(7, 3, 1).unwrap().groups().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, [2, 2, 3]);
        assert_eq!(default_decompose(20, 4, 9).unwrap(), default_decompose(20, 4, 9).unwrap());
        assert!(default_decompose(5, 1, 0).is_err());
        assert!(default_decompose(5, 6, 0).is_err());
        assert!(default_decompose(9, 4, 3).unwrap().validate().is_decomposition());
    }

    #[test]
    fn literal_round_trip_and_errors() {
        let p = parse_partition("[[1, 3],[2]]", 3).unwrap();
        assert_eq!(p.to_string(), "[[1,3],[2]]");
        assert!(parse_partition("[[0,1]]", 2).is_err());
        assert!(parse_partition("[[1],[1]]", 2).is_err());
        assert!(parse_partition("not a list", 2).is_err());
    }
}
