//! Sparse complex polynomials in four variables `(y1, y2, y3, y4)`.
//!
//! For normal-form work `y3 = ȳ1` and `y4 = ȳ2`; the polynomial algebra
//! treats all four as independent.

use num_complex::Complex64;
use std::collections::BTreeMap;

/// Exponent vector of a monomial.
pub type Monomial = [u8; 4];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Complex64>,
}

/// Total degree of a monomial.
pub fn degree(m: &Monomial) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

/// Sorted variable indices of a monomial, e.g. `y1 y2 y4 → [0, 1, 3]`.
pub fn indices(m: &Monomial) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, &e) in m.iter().enumerate() {
        out.extend(std::iter::repeat(i).take(e as usize));
    }
    out
}

/// Conjugation map `y1 ↔ y3`, `y2 ↔ y4` on exponents.
pub fn conj_monomial(m: &Monomial) -> Monomial {
    [m[2], m[3], m[0], m[1]]
}

impl Poly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn monomial(m: Monomial, c: Complex64) -> Self {
        let mut p = Self::new();
        p.add_term(m, c);
        p
    }

    /// `Σ_j coeffs[j] y_j`.
    pub fn linear(coeffs: [Complex64; 4]) -> Self {
        let mut p = Self::new();
        for (j, c) in coeffs.into_iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut m = [0u8; 4];
            m[j] = 1;
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        *self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add_scaled(&mut self, other: &Poly, k: Complex64) {
        for (m, c) in &other.terms {
            self.add_term(*m, c * k);
        }
    }

    pub fn scaled(&self, k: Complex64) -> Poly {
        let mut p = Poly::new();
        p.add_scaled(self, k);
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2], ma[3] + mb[3]];
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// `∂/∂y_j`.
    pub fn derivative(&self, j: usize) -> Poly {
        let mut out = Poly::new();
        for (m, c) in &self.terms {
            if m[j] > 0 {
                let mut k = *m;
                k[j] -= 1;
                out.add_term(k, c * m[j] as f64);
            }
        }
        out
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, y: &[Complex64; 4]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = *c;
                for j in 0..4 {
                    for _ in 0..m[j] {
                        v *= y[j];
                    }
                }
                v
            })
            .sum()
    }

    /// Substitute `y_j ↦ subs[j]`.
    pub fn compose(&self, subs: &[Poly; 4]) -> Poly {
        let mut out = Poly::new();
        for (m, c) in &self.terms {
            let mut t = Poly::monomial([0; 4], *c);
            for j in 0..4 {
                for _ in 0..m[j] {
                    t = t.mul(&subs[j]);
                }
            }
            out.add_scaled(&t, Complex64::new(1.0, 0.0));
        }
        out
    }

    /// Terms of a given total degree.
    pub fn homogeneous(&self, deg: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| degree(m) == deg)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// Largest coefficient magnitude (0 for the empty polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// All monomials of a given degree, ordered lexicographically by their
/// sorted index tuples (`(0,0) < (0,1) < … < (3,3)` for degree two).
pub fn monomials_of_degree(deg: usize) -> Vec<Monomial> {
    fn rec(start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Monomial>) {
        if left == 0 {
            let mut m = [0u8; 4];
            for &i in cur.iter() {
                m[i] += 1;
            }
            out.push(m);
            return;
        }
        for i in start..4 {
            cur.push(i);
            rec(i, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, deg, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn monomial_counts_and_order() {
        assert_eq!(monomials_of_degree(2).len(), 10);
        assert_eq!(monomials_of_degree(3).len(), 20);
        let m2 = monomials_of_degree(2);
        assert_eq!(m2[0], [2, 0, 0, 0]);
        assert_eq!(m2[1], [1, 1, 0, 0]);
        assert_eq!(m2[9], [0, 0, 0, 2]);
        assert_eq!(indices(&[1, 0, 1, 1]), vec![0, 2, 3]);
    }

    #[test]
    fn product_derivative_eval() {
        let x = Poly::linear([c(1.0), c(2.0), c(0.0), c(0.0)]);
        let sq = x.mul(&x);
        assert_eq!(sq.coeff(&[1, 1, 0, 0]), c(4.0));
        let d = sq.derivative(1);
        // ∂/∂y2 (y1 + 2y2)² = 4(y1 + 2y2)
        assert_eq!(d.coeff(&[1, 0, 0, 0]), c(4.0));
        assert_eq!(d.coeff(&[0, 1, 0, 0]), c(8.0));
        let y = [c(0.5), c(-1.0), c(3.0), c(2.0)];
        assert!((sq.eval(&y) - c(2.25)).norm() < 1e-15);
    }

    #[test]
    fn composition() {
        // p = y1 y3, substitute y1 = y1 + y2, y3 = y3 − y4
        let p = Poly::monomial([1, 0, 1, 0], c(1.0));
        let subs = [
            Poly::linear([c(1.0), c(1.0), c(0.0), c(0.0)]),
            Poly::linear([c(0.0), c(1.0), c(0.0), c(0.0)]),
            Poly::linear([c(0.0), c(0.0), c(1.0), c(-1.0)]),
            Poly::linear([c(0.0), c(0.0), c(0.0), c(1.0)]),
        ];
        let q = p.compose(&subs);
        assert_eq!(q.len(), 4);
        assert_eq!(q.coeff(&[0, 1, 0, 1]), c(-1.0));
    }
}
