//! Candidate multi-index sets: rectangular `Y`, triangular `T` and
//! hyperbolic cross `S`.

use std::fmt;
use std::str::FromStr;

use crate::basis::MultiIndex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// `max_j n_j <= N`
    Rectangular,
    /// `sum_j n_j <= N`
    Triangular,
    /// `prod_j (n_j + 1) <= N + 1`
    HyperbolicCross,
}

impl Shape {
    pub const ALL: [Shape; 3] = [
        Shape::Rectangular,
        Shape::Triangular,
        Shape::HyperbolicCross,
    ];

    pub fn letter(self) -> &'static str {
        match self {
            Shape::Rectangular => "Y",
            Shape::Triangular => "T",
            Shape::HyperbolicCross => "S",
        }
    }

    pub fn admits(self, n: usize, entries: &[usize]) -> bool {
        match self {
            Shape::Rectangular => entries.iter().all(|&k| k <= n),
            Shape::Triangular => {
                let mut s = 0usize;
                for &k in entries {
                    s = s.saturating_add(k);
                }
                s <= n
            }
            Shape::HyperbolicCross => {
                let mut prod: u128 = 1;
                for &k in entries {
                    prod = prod.saturating_mul(k as u128 + 1);
                    if prod > n as u128 + 1 {
                        return false;
                    }
                }
                true
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Y" | "y" | "rectangular" => Ok(Shape::Rectangular),
            "T" | "t" | "triangular" => Ok(Shape::Triangular),
            "S" | "s" | "hyperbolic" | "hyperbolic-cross" => Ok(Shape::HyperbolicCross),
            other => Err(Error::Parse(format!("unknown shape {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    pub shape: Shape,
    pub n: usize,
    pub d: usize,
    indices: Vec<MultiIndex>,
}

pub fn build(shape: Shape, n: usize, d: usize) -> Result<IndexSet> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    let total = (n as u128 + 1).checked_pow(d as u32);
    if total.is_none_or(|t| t > 50_000_000) {
        return Err(Error::Capacity(format!(
            "rectangle ({n}+1)^{d} too large to enumerate"
        )));
    }
    // odometer over Y_N^d, last coordinate fastest => lexicographic order
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    loop {
        if shape.admits(n, &cur) {
            out.push(MultiIndex(cur.clone()));
        }
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(IndexSet {
                    shape,
                    n,
                    d,
                    indices: out,
                });
            }
            j -= 1;
            cur[j] += 1;
            if cur[j] <= n && (shape == Shape::Rectangular || shape.admits(n, &cur[..=j])) {
                break;
            }
            cur[j] = 0;
        }
    }
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    /// Membership by the shape predicate.
    pub fn contains(&self, n: &MultiIndex) -> Result<bool> {
        if n.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: n.dim(),
            });
        }
        Ok(self.shape.admits(self.n, n.entries()))
    }

    /// Position in the canonical ordering.
    pub fn position(&self, n: &MultiIndex) -> Option<usize> {
        self.indices.binary_search(n).ok()
    }

    pub fn max_degree(&self) -> usize {
        self.indices
            .iter()
            .map(|m| m.max_degree())
            .max()
            .unwrap_or(0)
    }

    /// One index per line, entries separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for idx in &self.indices {
            let parts: Vec<String> = idx.0.iter().map(|k| k.to_string()).collect();
            s.push_str(&parts.join(" "));
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn idx(v: &[[usize; 2]]) -> Vec<MultiIndex> {
        v.iter().map(|a| MultiIndex::from(*a)).collect()
    }

    fn brute(shape: Shape, n: usize, d: usize) -> Vec<MultiIndex> {
        let side = n + 1;
        let mut out = Vec::new();
        for code in 0..side.pow(d as u32) {
            let mut e = vec![0; d];
            let mut c = code;
            for j in (0..d).rev() {
                e[j] = c % side;
                c /= side;
            }
            let ok = match shape {
                Shape::Rectangular => true,
                Shape::Triangular => e.iter().sum::<usize>() <= n,
                Shape::HyperbolicCross => e.iter().map(|k| k + 1).product::<usize>() <= n + 1,
            };
            if ok {
                out.push(MultiIndex(e));
            }
        }
        out
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn build_examples() {
        let y = build(Shape::Rectangular, 1, 2).unwrap();
        assert_eq!(
            y.indices(),
            idx(&[[0, 0], [0, 1], [1, 0], [1, 1]]).as_slice()
        );
        let s = build(Shape::HyperbolicCross, 3, 2).unwrap();
        assert_eq!(
            s.indices(),
            idx(&[
                [0, 0],
                [0, 1],
                [0, 2],
                [0, 3],
                [1, 0],
                [1, 1],
                [2, 0],
                [3, 0]
            ])
            .as_slice()
        );
        let t = build(Shape::Triangular, 2, 2).unwrap();
        assert_eq!(
            t.indices(),
            idx(&[[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [2, 0]]).as_slice()
        );
        assert!(build(Shape::Triangular, 2, 0).is_err());
    }

    #[test]
    fn contains_examples() {
        let s = build(Shape::HyperbolicCross, 3, 2).unwrap();
        assert!(s.contains(&MultiIndex::from([1, 1])).unwrap());
        assert!(!s.contains(&MultiIndex::from([1, 2])).unwrap());
        let y = build(Shape::Rectangular, 5, 2).unwrap();
        assert!(y.contains(&MultiIndex::from([5, 5])).unwrap());
        assert!(y.contains(&MultiIndex::from([1, 1, 1])).is_err());
    }

    #[test]
    fn brute_force_suite() {
        for d in 1..=4 {
            let nmax = if d <= 2 {
                20
            } else if d == 3 {
                12
            } else {
                8
            };
            for n in 0..=nmax {
                let y = build(Shape::Rectangular, n, d).unwrap();
                let t = build(Shape::Triangular, n, d).unwrap();
                let s = build(Shape::HyperbolicCross, n, d).unwrap();
                assert_eq!(y.indices(), brute(Shape::Rectangular, n, d).as_slice());
                assert_eq!(t.indices(), brute(Shape::Triangular, n, d).as_slice());
                assert_eq!(s.indices(), brute(Shape::HyperbolicCross, n, d).as_slice());
                assert_eq!(y.len(), (n + 1).pow(d as u32));
                assert_eq!(t.len(), binom(n + d, d));
                assert!(s.len() <= y.len());
                for m in s.iter() {
                    assert!(y.contains(m).unwrap());
                    assert!(y.position(m).is_some());
                }
            }
        }
    }

    #[test]
    fn sorted_and_deterministic() {
        for shape in Shape::ALL {
            let a = build(shape, 9, 3).unwrap();
            let b = build(shape, 9, 3).unwrap();
            assert_eq!(a, b);
            assert!(a.indices().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn hyperbolic_growth_is_n_log_n() {
        let mut ratios = Vec::new();
        for n in 4..=64 {
            let s = build(Shape::HyperbolicCross, n, 2).unwrap();
            ratios.push(s.len() as f64 / (n as f64 * (n as f64).ln()));
            assert_eq!(
                build(Shape::Rectangular, n, 2).unwrap().len(),
                (n + 1) * (n + 1)
            );
        }
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi < 3.0 && lo > 0.5, "ratios in [{lo}, {hi}]");
    }

    #[test]
    fn text_format() {
        let s = build(Shape::HyperbolicCross, 3, 2).unwrap();
        let text = s.to_text();
        assert_eq!(text.lines().count(), 8);
        assert_eq!(text.lines().nth(5).unwrap(), "1 1");
    }

    proptest! {
        #[test]
        fn contains_matches_list(n in 0usize..12, a in 0usize..14, b in 0usize..14, shape in 0usize..3) {
            let set = build(Shape::ALL[shape], n, 2).unwrap();
            let m = MultiIndex::from([a, b]);
            prop_assert_eq!(set.contains(&m).unwrap(), set.position(&m).is_some());
        }
    }
}
