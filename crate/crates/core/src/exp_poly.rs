//! Exponential polynomials `Σ pₖ(t) e^{zₖ t}` with complex coefficients.
//!
//! Every function handled in closed form here (edge solutions of `-u'' = λu`,
//! piecewise-linear mesh functions, cutoffs, the weights `e^{-2αρ}`) is an
//! exponential polynomial on each piece of an edge, and so is any product of
//! them. Integrals are computed from antiderivatives; short intervals use the
//! power series of the moments to avoid cancellation.

use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub rate: C64,
    /// `poly[k]` multiplies `t^k`.
    pub poly: Vec<C64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::polynomial(vec![c])
    }

    /// `c0 + c1 t`.
    pub fn linear(c0: C64, c1: C64) -> Self {
        Self::polynomial(vec![c0, c1])
    }

    pub fn polynomial(poly: Vec<C64>) -> Self {
        let mut out = Self::zero();
        out.push(Term {
            rate: C64::new(0.0, 0.0),
            poly,
        });
        out
    }

    /// `c e^{rate t}`.
    pub fn exponential(c: C64, rate: C64) -> Self {
        let mut out = Self::zero();
        out.push(Term {
            rate,
            poly: vec![c],
        });
        out
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn push(&mut self, term: Term) {
        if term.poly.iter().all(|c| *c == C64::new(0.0, 0.0)) {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.rate == term.rate) {
            if t.poly.len() < term.poly.len() {
                t.poly.resize(term.poly.len(), C64::new(0.0, 0.0));
            }
            for (a, b) in t.poly.iter_mut().zip(&term.poly) {
                *a += b;
            }
        } else {
            self.terms.push(term);
        }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out
    }

    pub fn scale(&self, c: C64) -> ExpPoly {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    rate: t.rate,
                    poly: t.poly.iter().map(|p| p * c).collect(),
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.push(Term {
                    rate: a.rate + b.rate,
                    poly: poly_mul(&a.poly, &b.poly),
                });
            }
        }
        out
    }

    /// Pointwise complex conjugate (for real `t`).
    pub fn conj(&self) -> ExpPoly {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    rate: t.rate.conj(),
                    poly: t.poly.iter().map(|c| c.conj()).collect(),
                })
                .collect(),
        }
    }

    pub fn deriv(&self) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for t in &self.terms {
            let n = t.poly.len();
            let mut poly = vec![C64::new(0.0, 0.0); n];
            for k in 0..n {
                poly[k] += t.rate * t.poly[k];
                if k + 1 < n {
                    poly[k] += t.poly[k + 1] * (k + 1) as f64;
                }
            }
            out.push(Term { rate: t.rate, poly });
        }
        out
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|term| {
                let p = term
                    .poly
                    .iter()
                    .rev()
                    .fold(C64::new(0.0, 0.0), |acc, c| acc * t + c);
                p * (term.rate * t).exp()
            })
            .sum()
    }

    /// The function `s ↦ f(a + s)`.
    pub fn shifted(&self, a: f64) -> ExpPoly {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let factor = (t.rate * a).exp();
                    Term {
                        rate: t.rate,
                        poly: taylor_shift(&t.poly, a)
                            .into_iter()
                            .map(|c| c * factor)
                            .collect(),
                    }
                })
                .collect(),
        }
    }

    /// `∫_0^w f(s) ds`.
    pub fn integrate_from_zero(&self, w: f64) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                let m = moments(t.rate, w, t.poly.len());
                t.poly.iter().zip(&m).map(|(c, mk)| c * mk).sum::<C64>()
            })
            .sum()
    }

    /// `∫_a^b f(t) dt`, evaluated around `a`.
    pub fn integrate(&self, a: f64, b: f64) -> C64 {
        if b == a {
            return C64::new(0.0, 0.0);
        }
        self.shifted(a).integrate_from_zero(b - a)
    }
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `p(a + s)` in powers of `s`.
fn taylor_shift(p: &[C64], a: f64) -> Vec<C64> {
    let mut q = p.to_vec();
    let n = q.len();
    if a == 0.0 {
        return q;
    }
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = q[j + 1];
            q[j] += next * a;
        }
    }
    q
}

/// `I_j = ∫_0^w s^j e^{z s} ds` for `j < n`.
fn moments(z: C64, w: f64, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n == 0 {
        return out;
    }
    let zw = z * w;
    if z == C64::new(0.0, 0.0) {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = C64::new(w.powi(j as i32 + 1) / (j as f64 + 1.0), 0.0);
        }
    } else if zw.norm() <= 2.0 {
        // Σ_m z^m w^{j+m+1} / (m! (j+m+1))
        for (j, slot) in out.iter_mut().enumerate() {
            let mut power = C64::new(w.powi(j as i32 + 1), 0.0);
            let mut sum = C64::new(0.0, 0.0);
            for m in 0..60 {
                let term = power / (j + m + 1) as f64;
                sum += term;
                if term.norm() <= 1e-18 * sum.norm() {
                    break;
                }
                power *= zw / (m + 1) as f64;
            }
            *slot = sum;
        }
    } else {
        let ezw = zw.exp();
        out[0] = (ezw - 1.0) / z;
        let mut wj = 1.0;
        for j in 1..n {
            wj *= w;
            out[j] = (ezw * wj - out[j - 1] * j as f64) / z;
        }
    }
    out
}
