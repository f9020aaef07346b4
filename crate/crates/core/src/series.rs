//! Recovered sparse series, reference coefficients of the test functions and
//! coefficient error diagnostics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::basis::{
    eval_multivariate, hermite_norm, orthonormal_upto, BasisFamily, BasisKind, MultiIndex,
};
use crate::error::{Error, Result};
use crate::indexsets::IndexSet;
use crate::quadrature::gauss_hermite;

/// Coefficients below this magnitude are not part of a support.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

/// Quadrature order used for reference coefficients.
pub const REFERENCE_NODES: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSeries {
    pub basis: BasisFamily,
    terms: Vec<(MultiIndex, f64)>,
}

impl SparseSeries {
    pub fn new(basis: BasisFamily, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::with_capacity(terms.len());
        for (n, c) in terms {
            if n.dim() != basis.dimension {
                return Err(Error::DimensionMismatch {
                    expected: basis.dimension,
                    got: n.dim(),
                });
            }
            if !c.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient at {n}")));
            }
            if !seen.insert(n.clone()) {
                return Err(Error::InvalidParameter(format!("duplicate index {n}")));
            }
            if c != 0.0 {
                kept.push((n, c));
            }
        }
        Ok(SparseSeries { basis, terms: kept })
    }

    pub fn empty(basis: BasisFamily) -> Self {
        SparseSeries {
            basis,
            terms: Vec::new(),
        }
    }

    /// Terms of a coefficient vector laid out on `indexset`, dropping
    /// entries with `|c| <= threshold`.
    pub fn from_coefficients(
        basis: BasisFamily,
        indexset: &IndexSet,
        coefficients: &[f64],
        threshold: f64,
    ) -> Result<Self> {
        if coefficients.len() != indexset.len() {
            return Err(Error::DimensionMismatch {
                expected: indexset.len(),
                got: coefficients.len(),
            });
        }
        let terms = indexset
            .iter()
            .zip(coefficients)
            .filter(|(_, c)| c.abs() > threshold)
            .map(|(n, c)| (n.clone(), *c))
            .collect();
        Self::new(basis, terms)
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.basis.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dimension,
                got: point.len(),
            });
        }
        let mut s = 0.0;
        for (n, c) in &self.terms {
            s += c * eval_multivariate(&self.basis, n, point)?;
        }
        Ok(s)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &SparseSeries, beta: f64) -> Result<SparseSeries> {
        if self.basis != other.basis {
            return Err(Error::WrongBasis("series bases differ".into()));
        }
        let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (n, c) in &self.terms {
            *acc.entry(n.clone()).or_default() += alpha * c;
        }
        for (n, c) in &other.terms {
            *acc.entry(n.clone()).or_default() += beta * c;
        }
        SparseSeries::new(self.basis, acc.into_iter().collect())
    }

    /// One term per line: `n1 n2 ... nd coefficient`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (n, c) in &self.terms {
            for k in &n.0 {
                s.push_str(&k.to_string());
                s.push(' ');
            }
            s.push_str(&format!("{c:e}\n"));
        }
        s
    }

    pub fn from_text(basis: BasisFamily, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != basis.dimension + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields",
                    ln + 1,
                    basis.dimension + 1
                )));
            }
            let idx = parts[..basis.dimension]
                .iter()
                .map(|p| {
                    p.parse::<usize>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            let c: f64 = parts[basis.dimension]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
            terms.push((MultiIndex(idx), c));
        }
        Self::new(basis, terms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction {
    /// `x^2 y^2`
    F1,
    /// `x^4 y^4`
    F2,
    /// `x e^y`
    F3,
}

impl TestFunction {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            TestFunction::F1 => x * x * y * y,
            TestFunction::F2 => x.powi(4) * y.powi(4),
            TestFunction::F3 => x * y.exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
            TestFunction::F3 => "f3",
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            "f3" => Ok(TestFunction::F3),
            other => Err(Error::Parse(format!("unknown function {other:?}"))),
        }
    }
}

/// Orthonormal Hermite coefficients `<g, pi_n>_w` of a bivariate function on
/// `indexset`, by tensor Gauss-Hermite quadrature with `nodes` points per axis.
/// Entries below `1e-13 * max |c|` are dropped.
pub fn hermite_coefficients_2d(
    g: impl Fn(f64, f64) -> f64,
    indexset: &IndexSet,
    nodes: usize,
) -> Result<BTreeMap<MultiIndex, f64>> {
    if indexset.d != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: indexset.d,
        });
    }
    let (z, w) = gauss_hermite(nodes)?;
    let deg = indexset.max_degree();
    let tab = z
        .iter()
        .map(|&x| orthonormal_upto(BasisKind::HermitePhysicists, deg, x))
        .collect::<Result<Vec<_>>>()?;
    let mut vals = vec![0.0; nodes * nodes];
    for i in 0..nodes {
        for j in 0..nodes {
            vals[i * nodes + j] = w[i] * w[j] * g(z[i], z[j]);
        }
    }
    let mut raw = Vec::with_capacity(indexset.len());
    for n in indexset.iter() {
        let (a, b) = (n.0[0], n.0[1]);
        let mut s = 0.0;
        for i in 0..nodes {
            let mut row = 0.0;
            for j in 0..nodes {
                row += vals[i * nodes + j] * tab[j][b];
            }
            s += row * tab[i][a];
        }
        raw.push((n.clone(), s));
    }
    let cmax = raw.iter().fold(0.0f64, |m, (_, c)| m.max(c.abs()));
    Ok(raw
        .into_iter()
        .filter(|(_, c)| c.abs() > 1e-13 * cmax)
        .collect())
}

pub fn reference_coefficients(
    function: TestFunction,
    indexset: &IndexSet,
) -> Result<BTreeMap<MultiIndex, f64>> {
    hermite_coefficients_2d(|x, y| function.eval(x, y), indexset, REFERENCE_NODES)
}

/// Scale in which coefficient differences are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientScale {
    /// Coefficients of the orthonormal basis.
    #[default]
    Orthonormal,
    /// Coefficients of the unnormalized physicists' Hermite products
    /// `H_n1(x) H_n2(y)`.
    Hermite,
}

impl CoefficientScale {
    pub fn factor(self, n: &MultiIndex) -> f64 {
        match self {
            CoefficientScale::Orthonormal => 1.0,
            CoefficientScale::Hermite => n.0.iter().map(|&k| 1.0 / hermite_norm(k)).product(),
        }
    }
}

/// Which indices enter the error norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorDomain {
    /// Union of the index set and the reference support; reference terms
    /// outside the index set count in full.
    #[default]
    Union,
    /// Only the indices of the index set.
    IndexSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientError {
    pub l2: f64,
    pub linf: f64,
    pub support_match: bool,
}

pub fn coefficient_error(
    recovered: &[f64],
    reference: &BTreeMap<MultiIndex, f64>,
    indexset: &IndexSet,
) -> Result<CoefficientError> {
    coefficient_error_with(
        recovered,
        reference,
        indexset,
        CoefficientScale::Orthonormal,
        ErrorDomain::Union,
    )
}

pub fn coefficient_error_with(
    recovered: &[f64],
    reference: &BTreeMap<MultiIndex, f64>,
    indexset: &IndexSet,
    scale: CoefficientScale,
    domain: ErrorDomain,
) -> Result<CoefficientError> {
    if recovered.len() != indexset.len() {
        return Err(Error::DimensionMismatch {
            expected: indexset.len(),
            got: recovered.len(),
        });
    }
    let mut sq = 0.0;
    let mut linf: f64 = 0.0;
    let mut rec_support = BTreeSet::new();
    for (n, c) in indexset.iter().zip(recovered) {
        let s = scale.factor(n);
        let diff = (c - reference.get(n).copied().unwrap_or(0.0)) * s;
        sq += diff * diff;
        linf = linf.max(diff.abs());
        if (c * s).abs() > SUPPORT_THRESHOLD {
            rec_support.insert(n.clone());
        }
    }
    let mut ref_support = BTreeSet::new();
    for (n, c) in reference {
        let s = scale.factor(n);
        if (c * s).abs() > SUPPORT_THRESHOLD {
            ref_support.insert(n.clone());
        }
        if domain == ErrorDomain::Union && indexset.position(n).is_none() {
            sq += (c * s) * (c * s);
            linf = linf.max((c * s).abs());
        }
    }
    Ok(CoefficientError {
        l2: sq.sqrt(),
        linf,
        support_match: rec_support == ref_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::{build, Shape};
    use std::f64::consts::PI;

    fn y(n: usize) -> IndexSet {
        build(Shape::Rectangular, n, 2).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let fam = BasisFamily::hermite(2).unwrap();
        let empty = SparseSeries::empty(fam);
        assert_eq!(empty.evaluate(&[0.3, -2.0]).unwrap(), 0.0);
        let one = SparseSeries::new(fam, vec![(MultiIndex::from([0, 0]), PI.sqrt())]).unwrap();
        for p in [[0.0, 0.0], [1.5, -0.2], [-3.0, 4.0]] {
            assert!((one.evaluate(&p).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(one.evaluate(&[1.0]).is_err());
    }

    #[test]
    fn series_validation() {
        let fam = BasisFamily::hermite(2).unwrap();
        let dup = vec![
            (MultiIndex::from([1, 0]), 1.0),
            (MultiIndex::from([1, 0]), 2.0),
        ];
        assert!(SparseSeries::new(fam, dup).is_err());
        assert!(SparseSeries::new(fam, vec![(MultiIndex::from([1, 0]), f64::NAN)]).is_err());
        let s = SparseSeries::new(fam, vec![(MultiIndex::from([1, 0]), 0.0)]).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn f1_closed_form() {
        // x^2 = (H_2 + 2 H_0) / 4, so <x^2, p_0> = pi^(1/4)/2 and <x^2, p_2> = pi^(1/4)/sqrt(2)
        let r = reference_coefficients(TestFunction::F1, &y(6)).unwrap();
        let a0 = PI.powf(0.25) / 2.0;
        let a2 = PI.powf(0.25) / 2f64.sqrt();
        let want = [
            ([0, 0], a0 * a0),
            ([0, 2], a0 * a2),
            ([2, 0], a2 * a0),
            ([2, 2], a2 * a2),
        ];
        assert_eq!(r.len(), 4);
        for (n, v) in want {
            assert!((r[&MultiIndex::from(n)] - v).abs() < 1e-13);
        }
        // in the Hermite scale the coefficients are those of x^2 y^2 = (H2+2)(H2+2)/16
        let h = CoefficientScale::Hermite;
        assert!(
            (r[&MultiIndex::from([0, 0])] * h.factor(&MultiIndex::from([0, 0])) - 0.25).abs()
                < 1e-14
        );
        assert!(
            (r[&MultiIndex::from([2, 2])] * h.factor(&MultiIndex::from([2, 2])) - 1.0 / 16.0).abs()
                < 1e-14
        );
    }

    #[test]
    fn f2_support() {
        let r = reference_coefficients(TestFunction::F2, &y(8)).unwrap();
        let keys: BTreeSet<_> = r.keys().cloned().collect();
        let want: BTreeSet<_> = [0, 2, 4]
            .iter()
            .flat_map(|&a| [0, 2, 4].iter().map(move |&b| MultiIndex::from([a, b])))
            .collect();
        assert_eq!(keys, want);
    }

    #[test]
    fn f3_coefficients_are_separable() {
        // x e^y: <x, p_1> = pi^(1/4)/sqrt(2); <e^y, p_n> = pi^(1/4) e^(1/4) / sqrt(2^n n!)
        let r = reference_coefficients(TestFunction::F3, &y(9)).unwrap();
        for n in 0..=9usize {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let want = PI.powf(0.25) / 2f64.sqrt() * PI.powf(0.25) * 0.25f64.exp()
                / (2f64.powi(n as i32) * fact).sqrt();
            let got = r[&MultiIndex::from([1, n])];
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "n={n}");
        }
        assert!(r.keys().all(|k| k.0[0] == 1));
    }

    #[test]
    fn error_examples() {
        let set = y(3);
        let reference = reference_coefficients(TestFunction::F1, &set).unwrap();
        let exact: Vec<f64> = set
            .iter()
            .map(|n| reference.get(n).copied().unwrap_or(0.0))
            .collect();
        let e = coefficient_error(&exact, &reference, &set).unwrap();
        assert_eq!(e.l2, 0.0);
        assert!(e.support_match);

        let mut pert = exact.clone();
        pert[5] += 1e-3;
        let e = coefficient_error(&pert, &reference, &set).unwrap();
        assert!((e.l2 - 1e-3).abs() < 1e-15);

        let small = y(1);
        let full = reference_coefficients(TestFunction::F1, &y(4)).unwrap();
        let rec: Vec<f64> = small
            .iter()
            .map(|n| full.get(n).copied().unwrap_or(0.0))
            .collect();
        let e = coefficient_error(&rec, &full, &small).unwrap();
        let missing: f64 = full
            .iter()
            .filter(|(n, _)| small.position(n).is_none())
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .sqrt();
        assert!(e.l2 >= missing - 1e-15 && e.l2 > 0.17);
        assert!(!e.support_match);
        let e = coefficient_error_with(
            &rec,
            &full,
            &small,
            CoefficientScale::Orthonormal,
            ErrorDomain::IndexSet,
        )
        .unwrap();
        assert!(e.l2 < 1e-15);
    }

    #[test]
    fn text_roundtrip() {
        let fam = BasisFamily::hermite(2).unwrap();
        let s = SparseSeries::new(
            fam,
            vec![
                (MultiIndex::from([0, 2]), 0.1 + 0.2),
                (MultiIndex::from([3, 1]), -1.0 / 3.0),
            ],
        )
        .unwrap();
        let t = s.to_text();
        assert_eq!(t.lines().count(), 2);
        assert!(t.starts_with("0 2 "));
        assert_eq!(SparseSeries::from_text(fam, &t).unwrap(), s);
        assert!(SparseSeries::from_text(fam, "1 2\n").is_err());
    }

    #[test]
    fn truncation_error_decreases_for_f3() {
        let (z, w) = gauss_hermite(REFERENCE_NODES).unwrap();
        let fam = BasisFamily::hermite(2).unwrap();
        let mut last = f64::INFINITY;
        for n in 2..=9 {
            let set = y(n);
            let coeffs = reference_coefficients(TestFunction::F3, &set).unwrap();
            let series = SparseSeries::new(fam, coeffs.into_iter().collect()).unwrap();
            let mut sq = 0.0;
            for (xi, wi) in z.iter().zip(&w) {
                for (yj, wj) in z.iter().zip(&w) {
                    let d = TestFunction::F3.eval(*xi, *yj) - series.evaluate(&[*xi, *yj]).unwrap();
                    sq += wi * wj * d * d;
                }
            }
            let err = sq.sqrt();
            assert!(err <= last, "N={n}: {err} > {last}");
            last = err;
        }
        assert!(last < 1e-3);
    }

    proptest::proptest! {
        #[test]
        fn evaluate_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x in -2.0f64..2.0, yv in -2.0f64..2.0,
                              c1 in proptest::collection::vec(-1.0f64..1.0, 6),
                              c2 in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let fam = BasisFamily::hermite(2).unwrap();
            let set = build(Shape::Triangular, 2, 2).unwrap();
            let s1 = SparseSeries::from_coefficients(fam, &set, &c1, 0.0).unwrap();
            let s2 = SparseSeries::from_coefficients(fam, &set, &c2, 0.0).unwrap();
            let lhs = s1.combine(a, &s2, b).unwrap().evaluate(&[x, yv]).unwrap();
            let rhs = a * s1.evaluate(&[x, yv]).unwrap() + b * s2.evaluate(&[x, yv]).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }
}
