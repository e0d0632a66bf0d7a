//! Multilinear polynomials over 0/1 variables.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Sorted, duplicate-free variable indices; the product of those variables.
pub type Monomial = Vec<u32>;

/// Union of two sorted monomials (idempotent product).
pub fn mono_mul(a: &[u32], b: &[u32]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Sorts and deduplicates, turning any index list into a monomial.
pub fn monomial(mut vars: Vec<u32>) -> Monomial {
    vars.sort_unstable();
    vars.dedup();
    vars
}

pub fn is_subset(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// A polynomial in the multilinear basis; `x_i² = x_i` is applied on multiplication.
#[derive(Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(Monomial, f64)>", into = "Vec<(Monomial, f64)>")]
pub struct Poly {
    terms: BTreeMap<Monomial, f64>,
}

impl From<Vec<(Monomial, f64)>> for Poly {
    fn from(v: Vec<(Monomial, f64)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in v {
            p.add_term(monomial(m), c);
        }
        p
    }
}

impl From<Poly> for Vec<(Monomial, f64)> {
    fn from(p: Poly) -> Self {
        p.terms.into_iter().collect()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.is_empty() {
                    format!("{c}")
                } else {
                    let vars: Vec<String> = m.iter().map(|v| format!("x{v}")).collect();
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn var(i: u32) -> Self {
        Poly::term(vec![i], 1.0)
    }

    pub fn term(m: Monomial, c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term(monomial(m), c);
        p
    }

    /// `Σ_{i ∈ vars} x_i`.
    pub fn sum_of(vars: impl IntoIterator<Item = u32>) -> Self {
        let mut p = Poly::zero();
        for v in vars {
            p.add_term(vec![v], 1.0);
        }
        p
    }

    /// Adds `c · m`; `m` must already be sorted and duplicate-free.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &[u32]) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn variables(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in self.terms() {
            p.add_term(m.clone(), c * s);
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in other.terms() {
            p.add_term(m.clone(), c);
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                p.add_term(mono_mul(a, b), ca * cb);
            }
        }
        p
    }

    pub fn mul_monomial(&self, m: &[u32]) -> Poly {
        let mut p = Poly::zero();
        for (a, c) in self.terms() {
            p.add_term(mono_mul(a, m), c);
        }
        p
    }

    /// Value at the 0/1 point whose support is given by `is_one`.
    pub fn eval(&self, is_one: impl Fn(u32) -> bool) -> f64 {
        self.terms.iter().filter(|(m, _)| m.iter().all(|&v| is_one(v))).map(|(_, c)| *c).sum()
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> Poly {
        Poly { terms: self.terms.iter().filter(|(_, c)| c.abs() > tol).map(|(m, c)| (m.clone(), *c)).collect() }
    }

    /// Renames variables; `None` means the variable is fixed to zero and kills the term.
    pub fn substitute(&self, map: impl Fn(u32) -> Option<Option<u32>>) -> Poly {
        let mut p = Poly::zero();
        'terms: for (m, c) in self.terms() {
            let mut out = Vec::with_capacity(m.len());
            for &v in m {
                match map(v) {
                    None => continue 'terms,
                    Some(Some(w)) => out.push(w),
                    Some(None) => {}
                }
            }
            p.add_term(monomial(out), c);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idempotent_product() {
        let x = Poly::var(0);
        assert_eq!(x.mul(&x), x);
        let p = Poly::var(0).add(&Poly::var(1));
        let sq = p.mul(&p);
        assert_eq!(sq.coefficient(&[0]), 1.0);
        assert_eq!(sq.coefficient(&[0, 1]), 2.0);
        assert_eq!(sq.degree(), 2);
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Poly::var(3).sub(&Poly::var(3));
        assert!(p.is_zero());
    }

    #[test]
    fn eval_and_substitute() {
        let p = Poly::term(vec![0, 2], 2.0).add(&Poly::constant(-1.0));
        assert_eq!(p.eval(|v| v == 0 || v == 2), 1.0);
        assert_eq!(p.eval(|v| v == 0), -1.0);
        // x0 := 1, x2 -> x1
        let q = p.substitute(|v| match v {
            0 => Some(None),
            2 => Some(Some(1)),
            _ => Some(Some(v)),
        });
        assert_eq!(q.coefficient(&[1]), 2.0);
    }

    #[test]
    fn json_round_trip() {
        let p = Poly::term(vec![1, 4], 0.5).add(&Poly::constant(3.0));
        let s = serde_json::to_string(&p).unwrap();
        let q: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
