//! Classification of the models of mu_(p^n) by matrices: the defining
//! predicate (degree bounds plus three positivity conditions), the explicit
//! n = 3 congruence system, its tame-case specialization, and exhaustive
//! enumeration for n <= 3.
//!
//! The generic predicate is authoritative; the explicit congruences are a
//! second, independent implementation kept for cross-validation.

use crate::error::{Error, Result};
use crate::fq::Fq;
use crate::gmatrix::{self, EisensteinDigits, GMatrix};
use crate::laurent::LaurentPoly;
use crate::ring::Ring;
use crate::series::s_fun;
use crate::FqPoly;

/// Default working degree bound for lattice computations driven by E(u).
pub fn default_deg_bound(p: u64, e: i64) -> i64 {
    2 * e * (p as i64 + 1) + 2
}

/// A is a T-matrix iff UA / LA >= 0 (vacuous at n = 1).
pub fn is_t_matrix(fq: &Fq, a: &GMatrix) -> bool {
    if a.size() <= 1 {
        return true;
    }
    let ua = gmatrix::upper(a).expect("n >= 2");
    let la = gmatrix::lower(a).expect("n >= 2");
    gmatrix::rdiv(fq, &ua, &la).is_positive()
}

/// Distinguished: a T-matrix with polynomial entries, deg a_ij < l_j and
/// decreasing diagonal exponents. In debug builds a positive verdict is
/// cross-checked against the uniqueness round trip through the lattice.
pub fn is_distinguished(fq: &Fq, a: &GMatrix) -> bool {
    let l = a.diag_exponents();
    let verdict = l.windows(2).all(|w| w[0] >= w[1]) && a.degree_bounds_hold() && is_t_matrix(fq, a);
    #[cfg(debug_assertions)]
    if verdict {
        let max_deg = a
            .entries()
            .filter_map(|(_, _, e)| e.deg())
            .chain(l.iter().copied().map(|x| x.max(0)))
            .max()
            .unwrap_or(0);
        let bound = 2 * (max_deg + 2) * fq.p as i64 + 8;
        let lat = crate::lattice::Lattice::from_matrix(fq, a, bound)
            .expect("a distinguished matrix spans");
        debug_assert_eq!(&lat.distinguished_matrix(fq), a, "uniqueness round trip");
    }
    verdict
}

/// The four defining conditions: (1) degree bounds, (2) UA/LA >= 0,
/// (3) phi(A)/A >= 0, (4) (E(u) <> A)/phi(A) >= 0.
pub fn mu_matrix_conditions(fq: &Fq, a: &GMatrix, eis: &EisensteinDigits) -> [bool; 4] {
    let n = a.size();
    let cond1 = a.diag_exponents().iter().all(|&li| li >= 0) && a.degree_bounds_hold();
    let cond2 = is_t_matrix(fq, a);
    let phi = gmatrix::phi_mat(fq, a);
    let cond3 = gmatrix::rdiv(fq, &phi, a).is_positive();
    let diamond = gmatrix::ediamond(fq, &eis.truncated(n), a);
    let cond4 = gmatrix::rdiv(fq, &diamond, &phi).is_positive();
    [cond1, cond2, cond3, cond4]
}

pub fn is_mu_matrix(fq: &Fq, a: &GMatrix, eis: &EisensteinDigits) -> bool {
    mu_matrix_conditions(fq, a, eis).iter().all(|&c| c)
}

/// Model maps between the classified groups exist exactly along divisibility.
pub fn model_map_exists(fq: &Fq, a: &GMatrix, a_prime: &GMatrix) -> bool {
    gmatrix::succ(fq, a, a_prime)
}

/// Parameters of a size-3 candidate: the type and the three entries.
#[derive(Clone, Debug)]
pub struct MuParams3 {
    pub l1: i64,
    pub l2: i64,
    pub l3: i64,
    pub a12: FqPoly,
    pub a13: FqPoly,
    pub a23: FqPoly,
}

impl MuParams3 {
    pub fn to_matrix(&self) -> GMatrix {
        let mut g = GMatrix::diagonal(vec![self.l1, self.l2, self.l3]);
        g.set_entry(0, 1, self.a12.clone());
        g.set_entry(0, 2, self.a13.clone());
        g.set_entry(1, 2, self.a23.clone());
        g
    }

    pub fn from_matrix(a: &GMatrix) -> Self {
        assert_eq!(a.size(), 3);
        let l = a.diag_exponents();
        MuParams3 {
            l1: l[0],
            l2: l[1],
            l3: l[2],
            a12: a.entry(0, 1).clone(),
            a13: a.entry(0, 2).clone(),
            a23: a.entry(1, 2).clone(),
        }
    }
}

/// Identifier of one congruence group inside the explicit n = 3 system, for
/// the negative-control harness (modulus perturbation).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coro1Tweak {
    None,
    /// Perturb the u^(l3) modulus of a12 - u^(l1-l2) a23 by delta digits.
    CompatModulus(i64),
    /// Perturb the u^(l2) modulus of a12^p by delta digits.
    FrobModulus(i64),
    /// Perturb the u^(p l2) modulus of the first Eisenstein congruence.
    EisensteinModulus(i64),
    /// Perturb the u^(p l3) modulus of the corner congruence.
    CornerModulus(i64),
}

/// The explicit congruence system for n = 3 (which contains n = 1, 2 as
/// degenerate cases): five groups of conditions evaluated verbatim.
pub fn check_coro1(fq: &Fq, params: &MuParams3, eis: &EisensteinDigits, e: i64) -> bool {
    check_coro1_tweaked(fq, params, eis, e, Coro1Tweak::None)
}

pub fn check_coro1_tweaked(
    fq: &Fq,
    params: &MuParams3,
    eis: &EisensteinDigits,
    e: i64,
    tweak: Coro1Tweak,
) -> bool {
    let p = fq.p as i64;
    let (l1, l2, l3) = (params.l1, params.l2, params.l3);
    let (a12, a13, a23) = (&params.a12, &params.a13, &params.a23);
    let (d_compat, d_frob, d_eis, d_corner) = match tweak {
        Coro1Tweak::None => (0, 0, 0, 0),
        Coro1Tweak::CompatModulus(d) => (d, 0, 0, 0),
        Coro1Tweak::FrobModulus(d) => (0, d, 0, 0),
        Coro1Tweak::EisensteinModulus(d) => (0, 0, d, 0),
        Coro1Tweak::CornerModulus(d) => (0, 0, 0, d),
    };

    // 0 <= l3 <= l2 <= l1 <= e/(p-1)
    if !(0 <= l3 && l3 <= l2 && l2 <= l1 && (p - 1) * l1 <= e) {
        return false;
    }
    // (i) degree bounds
    let poly_deg_ok = |a: &FqPoly, bound: i64| match (a.val(), a.deg()) {
        (Some(v), Some(deg)) => v >= 0 && deg <= bound - 1,
        _ => true,
    };
    if !(poly_deg_ok(a12, l2) && poly_deg_ok(a13, l3) && poly_deg_ok(a23, l3)) {
        return false;
    }
    // (ii) a12 - u^(l1-l2) a23 = 0 mod u^l3; a12^p = 0 mod u^l2; a23^p = 0 mod u^l3
    let compat = a12.sub(fq, &a23.mul_monomial(l1 - l2));
    if !div_ok(&compat, l3 + d_compat) {
        return false;
    }
    let a12p = pow_poly(fq, a12, p as u64);
    let a23p = pow_poly(fq, a23, p as u64);
    if !div_ok(&a12p, l2 + d_frob) || !div_ok(&a23p, l3) {
        return false;
    }
    // (iii) a13^p - u^(-l2) a12^p a23 = 0 mod u^l3
    let a13p = pow_poly(fq, a13, p as u64);
    let t = a13p.sub(fq, &a12p.mul_monomial(-l2).mul(fq, a23));
    if !div_ok(&t, l3) {
        return false;
    }
    // (iv) u^e a12 + u^l1 E1 - u^(e-(p-1)l1) a12^p = 0 mod u^(p l2), same for a23
    let e1 = eis.digit(1);
    let e2 = eis.digit(2);
    let lhs1 = a12
        .mul_monomial(e)
        .add(fq, &e1.mul_monomial(l1))
        .sub(fq, &a12p.mul_monomial(e - (p - 1) * l1));
    if !div_ok(&lhs1, p * l2 + d_eis) {
        return false;
    }
    let lhs2 = a23
        .mul_monomial(e)
        .add(fq, &e1.mul_monomial(l2))
        .sub(fq, &a23p.mul_monomial(e - (p - 1) * l2));
    if !div_ok(&lhs2, p * l3) {
        return false;
    }
    // (v) the corner congruence mod u^(p l3), with the exact quotient of the
    // first Eisenstein congruence
    let quot = lhs1.mul_monomial(-p * l2);
    let corner = a13
        .mul_monomial(e)
        .add(fq, &a12.mul(fq, &e1))
        .add(fq, &s_fun(fq, 1, &[a12.mul_monomial(e), e1.mul_monomial(l1)]))
        .add(fq, &e2.mul_monomial(l1))
        .sub(fq, &a13p.mul_monomial(e - (p - 1) * l1))
        .sub(fq, &quot.mul(fq, &a23p));
    div_ok(&corner, p * l3 + d_corner)
}

fn div_ok(a: &FqPoly, k: i64) -> bool {
    a.val().map_or(true, |v| v >= k)
}

fn pow_poly(fq: &Fq, a: &FqPoly, k: u64) -> FqPoly {
    let mut acc = LaurentPoly::constant(fq, fq.one());
    for _ in 0..k {
        acc = acc.mul(fq, a);
    }
    acc
}

/// Tame-case system, valid when gcd(e, p) = 1; rejects e divisible by p.
pub fn check_tame(fq: &Fq, params: &MuParams3, eis: &EisensteinDigits, e: i64) -> Result<bool> {
    let p = fq.p as i64;
    if e % p == 0 {
        return Err(Error::OutOfScope("tame case requires gcd(e, p) = 1".into()));
    }
    let (l1, l2, l3) = (params.l1, params.l2, params.l3);
    let (a12, a13, a23) = (&params.a12, &params.a13, &params.a23);
    // 0 <= p^2 l3 <= p l2 <= l1 <= e/(p-1)
    if !(0 <= l3 && p * p * l3 <= p * l2 && p * l2 <= l1 && (p - 1) * l1 <= e) {
        return Ok(false);
    }
    let poly_deg_ok = |a: &FqPoly, bound: i64| match (a.val(), a.deg()) {
        (Some(v), Some(deg)) => v >= 0 && deg <= bound - 1,
        _ => true,
    };
    if !(poly_deg_ok(a12, l2) && poly_deg_ok(a13, l3) && poly_deg_ok(a23, l3)) {
        return Ok(false);
    }
    let a12p = pow_poly(fq, a12, p as u64);
    let a23p = pow_poly(fq, a23, p as u64);
    let a13p = pow_poly(fq, a13, p as u64);
    // (ii)
    if !div_ok(&a12p.mul_monomial(e - (p - 1) * l1), p * l2) {
        return Ok(false);
    }
    if !div_ok(&a23p.mul_monomial(e - (p - 1) * l2), p * l3) {
        return Ok(false);
    }
    // (iii)
    let e1 = eis.digit(1);
    let lhs1 = a12
        .mul_monomial(e)
        .add(fq, &e1.mul_monomial(l1))
        .sub(fq, &a12p.mul_monomial(e - (p - 1) * l1));
    if !div_ok(&lhs1, p * l2) {
        return Ok(false);
    }
    let quot = lhs1.mul_monomial(-p * l2);
    let lhs = a12
        .mul(fq, &e1)
        .sub(fq, &a13p.mul_monomial(e - (p - 1) * l1))
        .sub(fq, &quot.mul(fq, &a23p));
    Ok(div_ok(&lhs, p * l3))
}

/// All polynomials over F_q of degree < bound, in lexicographic coefficient
/// order (constant coefficient fastest).
pub fn polys_below(fq: &Fq, bound: i64) -> Vec<FqPoly> {
    if bound <= 0 {
        return vec![LaurentPoly::zero()];
    }
    let q = fq.q();
    let total = q.pow(bound as u32);
    (0..total)
        .map(|code| {
            let mut x = code;
            let coeffs: Vec<_> = (0..bound)
                .map(|_| {
                    let c = crate::fq::FqElem(x % q);
                    x /= q;
                    c
                })
                .collect();
            LaurentPoly::from_coeffs(fq, 0, coeffs)
        })
        .collect()
}

/// Decreasing tuples 0 <= l_n <= ... <= l_1 <= lmax, lexicographic on l.
pub fn types_below(n: usize, lmax: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, cap: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for l in 0..=cap {
            prefix.push(l);
            rec(n - 1, l, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, lmax, &mut Vec::new(), &mut out);
    out
}

/// Streaming candidate grid for one type: all entry tuples within the
/// degree bounds, in odometer order (later entries vary fastest).
pub struct CandidateIter<'a> {
    fq: &'a Fq,
    base: GMatrix,
    slots: Vec<(usize, usize, i64)>,
    state: Vec<u64>,
    done: bool,
}

impl<'a> Iterator for CandidateIter<'a> {
    type Item = GMatrix;

    fn next(&mut self) -> Option<GMatrix> {
        if self.done {
            return None;
        }
        let mut g = self.base.clone();
        for (k, &(i, j, bound)) in self.slots.iter().enumerate() {
            g.set_entry(i, j, decode_poly(self.fq, self.state[k], bound));
        }
        // advance the odometer
        let mut k = self.slots.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            let cap = self.fq.q().pow(self.slots[k].2 as u32);
            self.state[k] += 1;
            if self.state[k] < cap {
                break;
            }
            self.state[k] = 0;
        }
        Some(g)
    }
}

fn decode_poly(fq: &Fq, code: u64, bound: i64) -> FqPoly {
    if bound <= 0 {
        return LaurentPoly::zero();
    }
    let q = fq.q();
    let mut x = code;
    let coeffs: Vec<_> = (0..bound)
        .map(|_| {
            let c = crate::fq::FqElem(x % q);
            x /= q;
            c
        })
        .collect();
    LaurentPoly::from_coeffs(fq, 0, coeffs)
}

pub fn candidates_of_type<'a>(fq: &'a Fq, l: &[i64]) -> CandidateIter<'a> {
    let n = l.len();
    let mut slots = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            slots.push((i, j, l[j].max(0)));
        }
    }
    let state = vec![0u64; slots.len()];
    CandidateIter { fq, base: GMatrix::diagonal(l.to_vec()), slots, state, done: false }
}

/// Exhaustively enumerate the matrices classifying models of mu_(p^n),
/// n <= 3, streamed in deterministic order (lexicographic on the type, then
/// on coefficient tuples).
pub fn enumerate_mu_stream<'a>(
    fq: &'a Fq,
    n: usize,
    e: i64,
    eis: &'a EisensteinDigits,
) -> impl Iterator<Item = GMatrix> + 'a {
    assert!(n >= 1 && n <= 3, "enumeration is sized for n <= 3");
    let lmax = e / (fq.p as i64 - 1);
    types_below(n, lmax).into_iter().flat_map(move |l| {
        candidates_of_type(fq, &l).filter(move |cand| is_mu_matrix(fq, cand, eis))
    })
}

pub fn enumerate_mu(fq: &Fq, n: usize, e: i64, eis: &EisensteinDigits) -> Vec<GMatrix> {
    enumerate_mu_stream(fq, n, e, eis).collect()
}
