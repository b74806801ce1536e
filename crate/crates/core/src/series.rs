//! p-adic digit arithmetic for Laurent series with Witt-vector coefficients.
//!
//! An element of W_n(k)((u)) is held in Teichmüller coordinate form: n digits
//! x_1, ..., x_n in k((u)) standing for [x_1] + [x_2] p + ... + [x_n] p^(n-1).
//! The carry functions S_i and P_i act degreewise, so every operation reduces
//! to Witt sums of Teichmüller lifts of field scalars, which [`Fq`] memoizes.

use crate::fq::{Fq, FqElem};
use crate::laurent::{LaurentPoly, LaurentRing};
use crate::ring::Ring;
use crate::FqPoly;

/// S_i of the Teichmüller lifts of the argument series: the i-th p-adic digit
/// of [a_1] + ... + [a_r]. S_0 is the plain sum; higher digits are carries.
pub fn s_fun(fq: &Fq, i: usize, args: &[FqPoly]) -> FqPoly {
    all_sum_digits(fq, args, i + 1).swap_remove(i)
}

/// P_i of the argument series: the i-th p-adic digit of the product
/// [a_1] [a_2] ... [a_r].
pub fn p_fun(fq: &Fq, i: usize, args: &[FqPoly]) -> FqPoly {
    teich_product_digits(fq, args, i + 1).swap_remove(i)
}

/// All digits 0..len of the Witt sum of Teichmüller lifts.
pub fn all_sum_digits(fq: &Fq, args: &[FqPoly], len: usize) -> Vec<FqPoly> {
    let live: Vec<&FqPoly> = args.iter().filter(|a| !a.is_zero()).collect();
    let prec = args
        .iter()
        .filter_map(|a| a.precision())
        .min();
    if live.is_empty() {
        return vec![zero_with(prec); len];
    }
    let lo = live.iter().map(|a| a.val().unwrap()).min().unwrap();
    let hi = live.iter().map(|a| a.deg().unwrap()).max().unwrap();
    let mut out = vec![Vec::new(); len];
    for d in lo..=hi {
        let mut state = 0u64;
        for a in &live {
            let c = a.coeff(fq, d);
            state = fq.teich_add(state, c, len);
        }
        let comps = fq.unpack_state(state, len);
        for (i, w) in comps.into_iter().enumerate() {
            out[i].push(fq.root_p(w, i));
        }
    }
    out.into_iter()
        .map(|coeffs| LaurentPoly::from_parts(fq, lo, coeffs, prec))
        .collect()
}

/// All digits 0..len of the product of Teichmüller lifts, by convolving the
/// coefficient products degreewise and Witt-summing them.
pub fn teich_product_digits(fq: &Fq, args: &[FqPoly], len: usize) -> Vec<FqPoly> {
    let prec = product_prec(args);
    if args.iter().any(|a| a.is_zero()) {
        return vec![zero_with(prec); len];
    }
    // Degreewise lists of all coefficient products with degrees summing to d.
    let lo: i64 = args.iter().map(|a| a.val().unwrap()).sum();
    let hi: i64 = args.iter().map(|a| a.deg().unwrap()).sum();
    let width = (hi - lo + 1) as usize;
    let mut lists: Vec<Vec<FqElem>> = vec![Vec::new(); width];
    let mut partial: Vec<(i64, FqElem)> = vec![(0, fq.one())];
    for a in args {
        let mut next = Vec::new();
        for (d, c) in &partial {
            for (da, ca) in a.iter_terms(fq) {
                next.push((d + da, fq.mul(c, ca)));
            }
        }
        partial = next;
    }
    for (d, c) in partial {
        if c.0 != 0 {
            lists[(d - lo) as usize].push(c);
        }
    }
    let mut out = vec![Vec::new(); len];
    for (k, cs) in lists.iter().enumerate() {
        let mut state = 0u64;
        for &c in cs {
            state = fq.teich_add(state, c, len);
        }
        let comps = fq.unpack_state(state, len);
        for (i, w) in comps.into_iter().enumerate() {
            out[i].push(fq.root_p(w, i));
        }
        let _ = k;
    }
    out.into_iter()
        .map(|coeffs| LaurentPoly::from_parts(fq, lo, coeffs, prec))
        .collect()
}

fn product_prec(args: &[FqPoly]) -> Option<i64> {
    // Degreewise: coefficient at d of the product is known when every factor
    // is known up to the needed degrees; the standard min(P_a + val(rest)).
    let mut best: Option<i64> = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(p) = a.precision() {
            let mut rest_val = 0i64;
            for (j, b) in args.iter().enumerate() {
                if i != j {
                    match b.val().or(b.precision()) {
                        Some(v) => rest_val += v,
                        None => return None, // exact zero factor: product exact zero
                    }
                }
            }
            let cand = p + rest_val;
            best = Some(best.map_or(cand, |x: i64| x.min(cand)));
        }
    }
    best
}

fn zero_with(prec: Option<i64>) -> FqPoly {
    match prec {
        Some(p) => LaurentPoly::zero_mod(p),
        None => LaurentPoly::zero(),
    }
}

/// Frobenius of a series: coefficients to the p, degrees multiplied by p.
pub fn series_frobenius(fq: &Fq, a: &FqPoly) -> FqPoly {
    let mut out = zero_with(a.precision().map(|p| p * fq.p as i64));
    for (d, c) in a.iter_terms(fq) {
        let t = LaurentPoly::monomial(fq, d * fq.p as i64, fq.frobenius(*c));
        out = out.add(fq, &t);
    }
    out
}

/// Carry-save accumulator for sums of Teichmüller multiples of powers of p.
/// Slot t holds series whose Teichmüller lifts are weighted by p^t; collapse
/// resolves each slot with the multivariate carry functions, pushing S_i
/// overflow into slot t+i.
pub struct CarryAccum {
    slots: Vec<Vec<FqPoly>>,
}

impl CarryAccum {
    pub fn new(len: usize) -> Self {
        CarryAccum { slots: vec![Vec::new(); len] }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(|s| s.is_empty())
    }

    /// Add a Teichmüller contribution [c] p^pos; positions beyond the length
    /// are dropped (arithmetic in W_len).
    pub fn push(&mut self, pos: usize, c: FqPoly) {
        if pos < self.slots.len() && !(c.is_zero() && c.precision().is_none()) {
            self.slots[pos].push(c);
        }
    }

    pub fn collapse(mut self, fq: &Fq) -> PadicElem {
        let n = self.slots.len();
        let mut digits = Vec::with_capacity(n);
        for pos in 0..n {
            let terms = std::mem::take(&mut self.slots[pos]);
            if terms.len() <= 1 {
                digits.push(terms.into_iter().next().unwrap_or_else(LaurentPoly::zero));
                continue;
            }
            let mut all = all_sum_digits(fq, &terms, n - pos);
            for (i, carry) in all.iter().enumerate().skip(1) {
                if !(carry.is_zero() && carry.precision().is_none()) {
                    self.slots[pos + i].push(carry.clone());
                }
            }
            digits.push(all.swap_remove(0));
        }
        PadicElem { digits }
    }
}

/// Element of W_n(k)((u)) in canonical Teichmüller digit form. Two elements
/// are equal iff their digits are equal.
#[derive(Clone, PartialEq, Debug)]
pub struct PadicElem {
    digits: Vec<FqPoly>,
}

impl PadicElem {
    pub fn zero(n: usize) -> Self {
        PadicElem { digits: vec![LaurentPoly::zero(); n] }
    }

    pub fn from_digits(digits: Vec<FqPoly>) -> Self {
        PadicElem { digits }
    }

    /// The Teichmüller element [t].
    pub fn from_teich(t: FqPoly, n: usize) -> Self {
        let mut digits = vec![LaurentPoly::zero(); n];
        if n > 0 {
            digits[0] = t;
        }
        PadicElem { digits }
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[FqPoly] {
        &self.digits
    }

    pub fn digit(&self, i: usize) -> &FqPoly {
        &self.digits[i]
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|d| d.is_zero())
    }

    /// p-adic valuation: index of the first nonzero digit (None if zero).
    pub fn val_p(&self) -> Option<usize> {
        self.digits.iter().position(|d| !d.is_zero())
    }

    pub fn resized(&self, n: usize) -> Self {
        let mut digits = self.digits.clone();
        digits.resize(n, LaurentPoly::zero());
        PadicElem { digits }
    }

    pub fn add(&self, fq: &Fq, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let mut acc = CarryAccum::new(n);
        for (i, d) in self.digits.iter().take(n).enumerate() {
            acc.push(i, d.clone());
        }
        for (i, d) in other.digits.iter().take(n).enumerate() {
            acc.push(i, d.clone());
        }
        acc.collapse(fq)
    }

    /// Negation is digitwise for odd p.
    pub fn neg(&self, fq: &Fq) -> Self {
        assert!(fq.p >= 3);
        PadicElem { digits: self.digits.iter().map(|d| d.neg(fq)).collect() }
    }

    pub fn sub(&self, fq: &Fq, other: &Self) -> Self {
        self.add(fq, &other.neg(fq))
    }

    pub fn mul(&self, fq: &Fq, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let mut acc = CarryAccum::new(n);
        for (i, di) in self.digits.iter().take(n).enumerate() {
            if di.is_zero() && di.precision().is_none() {
                continue;
            }
            for (j, dj) in other.digits.iter().take(n).enumerate() {
                if i + j >= n || (dj.is_zero() && dj.precision().is_none()) {
                    continue;
                }
                let prods = teich_product_digits(fq, &[di.clone(), dj.clone()], n - i - j);
                for (t, c) in prods.into_iter().enumerate() {
                    acc.push(i + j + t, c);
                }
            }
        }
        acc.collapse(fq)
    }

    /// Multiplication by the Teichmüller lift [t].
    pub fn teich_mul(&self, fq: &Fq, t: &FqPoly) -> Self {
        let n = self.len();
        let mut acc = CarryAccum::new(n);
        for (i, di) in self.digits.iter().enumerate() {
            if di.is_zero() && di.precision().is_none() {
                continue;
            }
            let prods = teich_product_digits(fq, &[t.clone(), di.clone()], n - i);
            for (k, c) in prods.into_iter().enumerate() {
                acc.push(i + k, c);
            }
        }
        acc.collapse(fq)
    }

    /// Multiplication by p^k: a digit shift (tail truncated by W_n).
    pub fn mul_p_pow(&self, k: usize) -> Self {
        let n = self.len();
        let mut digits = vec![LaurentPoly::zero(); n];
        for i in 0..n.saturating_sub(k) {
            digits[i + k] = self.digits[i].clone();
        }
        PadicElem { digits }
    }

    /// Multiply every digit by the monomial u^k (this is multiplication by
    /// the Teichmüller element [u^k], exact on digits).
    pub fn mul_monomial(&self, k: i64) -> Self {
        PadicElem { digits: self.digits.iter().map(|d| d.mul_monomial(k)).collect() }
    }

    /// Frobenius of W_n(k)((u)): digitwise series Frobenius.
    pub fn frobenius(&self, fq: &Fq) -> Self {
        PadicElem { digits: self.digits.iter().map(|d| series_frobenius(fq, d)).collect() }
    }
}

/// Witt coefficients in the Laurent polynomial ring over F_q: the plugin
/// that lets the generic Witt machinery run with polynomial entries. The
/// ghost lift is the Laurent ring over the integral lift of F_q.
pub struct FqPolyCoeffs {
    fq: std::sync::Arc<Fq>,
    poly: LaurentRing<FqArc>,
    lift: LaurentRing<crate::ring::IntPolyQuot>,
}

/// Thin shared handle so the coefficient context can own its field.
pub struct FqArc(pub std::sync::Arc<Fq>);

impl Ring for FqArc {
    type Elem = FqElem;

    fn zero(&self) -> FqElem {
        self.0.zero()
    }
    fn one(&self) -> FqElem {
        self.0.one()
    }
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.0.add(a, b)
    }
    fn neg(&self, a: &FqElem) -> FqElem {
        self.0.neg(a)
    }
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.0.mul(a, b)
    }
    fn from_i64(&self, n: i64) -> FqElem {
        self.0.from_i64(n)
    }
}

impl FqPolyCoeffs {
    pub fn new(fq: std::sync::Arc<Fq>) -> Self {
        let lift = LaurentRing::new(fq.lift_ring_clone());
        FqPolyCoeffs { poly: LaurentRing::new(FqArc(fq.clone())), fq, lift }
    }

    pub fn fq(&self) -> &Fq {
        &self.fq
    }
}

impl Ring for FqPolyCoeffs {
    type Elem = LaurentPoly<FqArc>;

    fn zero(&self) -> Self::Elem {
        self.poly.zero()
    }
    fn one(&self) -> Self::Elem {
        self.poly.one()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.poly.add(a, b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.poly.neg(a)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.poly.mul(a, b)
    }
    fn from_i64(&self, n: i64) -> Self::Elem {
        self.poly.from_i64(n)
    }
}

impl crate::ring::WittCoeffs for FqPolyCoeffs {
    type Lift = LaurentRing<crate::ring::IntPolyQuot>;

    fn lift_ring(&self) -> &Self::Lift {
        &self.lift
    }

    fn lift(&self, a: &Self::Elem) -> LaurentPoly<crate::ring::IntPolyQuot> {
        let mut coeffs = Vec::new();
        let (lo, hi) = match (a.val(), a.deg()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return LaurentPoly::zero(),
        };
        for d in lo..=hi {
            coeffs.push(self.fq.lift(&a.coeff(&self.poly.base, d)));
        }
        LaurentPoly::from_coeffs(&self.lift.base, lo, coeffs)
    }

    fn reduce(&self, a: &LaurentPoly<crate::ring::IntPolyQuot>) -> Self::Elem {
        let mut coeffs = Vec::new();
        let (lo, hi) = match (a.val(), a.deg()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return LaurentPoly::zero(),
        };
        for d in lo..=hi {
            coeffs.push(self.fq.reduce(&a.coeff(&self.lift.base, d)));
        }
        LaurentPoly::from_coeffs(&self.poly.base, lo, coeffs)
    }
}

/// The truncated Witt ring W_len(F_q) as a ring object: the coefficient ring
/// of the independent route for checking digit-form identities.
pub struct WnRing {
    pub fq: std::sync::Arc<Fq>,
    pub len: usize,
}

impl Ring for WnRing {
    type Elem = crate::witt::WittVector<FqElem>;

    fn zero(&self) -> Self::Elem {
        crate::witt::witt_zero(&*self.fq, self.len)
    }
    fn one(&self) -> Self::Elem {
        crate::witt::teichmuller(&*self.fq, &self.fq.one(), self.len)
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        crate::witt::witt_add(self.fq.p, &*self.fq, a, b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        crate::witt::witt_neg(self.fq.p, &*self.fq, a)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        crate::witt::witt_mul(self.fq.p, &*self.fq, a, b)
    }
    fn from_i64(&self, n: i64) -> Self::Elem {
        crate::witt::witt_from_int(self.fq.p, &*self.fq, n, self.len)
    }
}

impl WnRing {
    /// The Teichmüller series lift of x in k((u)): coefficientwise [x_j].
    pub fn teich_series(&self, x: &FqPoly) -> LaurentPoly<WnRing> {
        let mut coeffs = Vec::new();
        let (lo, hi) = match (x.val(), x.deg()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return LaurentPoly::zero(),
        };
        for d in lo..=hi {
            coeffs.push(crate::witt::teichmuller(&*self.fq, &x.coeff(&*self.fq, d), self.len));
        }
        LaurentPoly::from_coeffs(self, lo, coeffs)
    }

    /// Evaluate a digit-form element as a Laurent series over W_len:
    /// sum_i [digit_i] p^i.
    pub fn eval_padic(&self, x: &PadicElem) -> LaurentPoly<WnRing> {
        let mut acc: LaurentPoly<WnRing> = LaurentPoly::zero();
        let mut p_pow = self.one();
        for (i, d) in x.digits().iter().enumerate() {
            if i > 0 {
                p_pow = self.mul(&p_pow, &self.from_i64(self.fq.p as i64));
            }
            let term = self.teich_series(d).scale(self, &p_pow);
            acc = acc.add(self, &term);
        }
        acc
    }
}

/// The unique Teichmüller coordinate matrix with M p* = [rho(M)] p*: row i of
/// the result is the digit expansion of sum_j M_ij p^(j-1). Entries of M are
/// digit-form elements of W_n(k)((u)); the matrix must have n columns.
pub fn rho(fq: &Fq, rows: &[Vec<PadicElem>]) -> Vec<Vec<FqPoly>> {
    rows.iter()
        .map(|row| {
            let n = row.len();
            let mut acc = CarryAccum::new(n);
            for (j, entry) in row.iter().enumerate() {
                for (t, d) in entry.digits().iter().enumerate() {
                    if j + t < n {
                        acc.push(j + t, d.clone());
                    }
                }
            }
            acc.collapse(fq).digits.to_vec()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::WittCoeffs;

    fn fp3() -> Fq {
        Fq::prime_field(3)
    }

    fn poly(f: &Fq, min: i64, cs: &[i64]) -> FqPoly {
        LaurentPoly::from_coeffs(f, min, cs.iter().map(|&c| f.elem_from_i64(c)).collect())
    }

    #[test]
    fn s0_is_plain_sum() {
        let f = fp3();
        let a = poly(&f, 0, &[1, 2, 1]);
        let b = poly(&f, -1, &[2, 2]);
        assert_eq!(s_fun(&f, 0, &[a.clone(), b.clone()]), a.add(&f, &b));
    }

    #[test]
    fn s1_of_one_and_one_is_one_mod_3() {
        // sigma_1(1,1) = (1 + 1 - 2^3)/3 = -2 = 1 mod 3.
        let f = fp3();
        let one = poly(&f, 0, &[1]);
        assert_eq!(s_fun(&f, 1, &[one.clone(), one.clone()]), poly(&f, 0, &[1]));
    }

    #[test]
    fn s1_of_inverses_vanishes() {
        let f = fp3();
        let a = poly(&f, 0, &[1, 2]);
        let na = a.neg(&f);
        assert!(s_fun(&f, 1, &[a, na]).is_zero());
    }

    #[test]
    fn s1_cocycle_identity() {
        // S_1(a,b,c) = S_1(a,b) + S_1(a (+) b, c) where (+) is the Witt sum,
        // i.e. adding [a]+[b] first: the three-argument digit agrees with the
        //two-step carry. Checked on fixed series.
        let f = fp3();
        let a = poly(&f, 0, &[1, 2]);
        let b = poly(&f, 1, &[2, 1]);
        let c = poly(&f, 0, &[2]);
        let lhs = s_fun(&f, 1, &[a.clone(), b.clone(), c.clone()]);
        // [a]+[b] = [s0] + [s1] p; then ([s0]+[c]) carries S_1(s0,c); total
        // digit-1: s1 + S_1(s0, c).
        let s0 = s_fun(&f, 0, &[a.clone(), b.clone()]);
        let s1 = s_fun(&f, 1, &[a, b]);
        let rhs = s1.add(&f, &s_fun(&f, 1, &[s0, c]));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn s1_antisymmetry_variant() {
        // S_1(a, b-a) = S_1(a, -b)
        let f = fp3();
        let a = poly(&f, 0, &[2, 1, 1]);
        let b = poly(&f, -1, &[1, 0, 2]);
        let lhs = s_fun(&f, 1, &[a.clone(), b.sub(&f, &a)]);
        let rhs = s_fun(&f, 1, &[a, b.neg(&f)]);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn carry_valuation_bound() {
        // val(S_i(a,b)) >= max(val a, val b) for i >= 1.
        let f = fp3();
        let a = poly(&f, 2, &[1, 2, 1]);
        let b = poly(&f, 1, &[2, 2, 2]);
        for i in 1..3 {
            let s = s_fun(&f, i, &[a.clone(), b.clone()]);
            if let Some(v) = s.val() {
                assert!(v >= 2);
            }
        }
    }

    #[test]
    fn monomial_teichmuller_multiplicativity() {
        // [a][b] = [ab] when a is a monomial.
        let f = fp3();
        let a = poly(&f, 3, &[2]);
        let b = poly(&f, -1, &[1, 1, 2]);
        let digits = teich_product_digits(&f, &[a.clone(), b.clone()], 3);
        assert_eq!(digits[0], a.mul(&f, &b));
        assert!(digits[1].is_zero());
        assert!(digits[2].is_zero());
    }

    #[test]
    fn padic_add_reconstructs_teich_sum() {
        let f = fp3();
        let a = poly(&f, 0, &[1, 1]);
        let b = poly(&f, 0, &[2, 2]);
        let x = PadicElem::from_teich(a.clone(), 3);
        let y = PadicElem::from_teich(b.clone(), 3);
        let s = x.add(&f, &y);
        for i in 0..3 {
            assert_eq!(*s.digit(i), s_fun(&f, i, &[a.clone(), b.clone()]));
        }
    }

    #[test]
    fn padic_mul_matches_p_fun() {
        let f = fp3();
        let a = poly(&f, 0, &[1, 2, 1]);
        let b = poly(&f, 1, &[2, 1]);
        let x = PadicElem::from_teich(a.clone(), 3);
        let y = PadicElem::from_teich(b.clone(), 3);
        let m = x.mul(&f, &y);
        for i in 0..3 {
            assert_eq!(*m.digit(i), p_fun(&f, i, &[a.clone(), b.clone()]));
        }
    }

    #[test]
    fn padic_additive_inverse() {
        let f = fp3();
        let mut x = PadicElem::zero(3);
        x = x.add(&f, &PadicElem::from_teich(poly(&f, 0, &[1, 2]), 3));
        x = x.add(&f, &PadicElem::from_digits(vec![
            poly(&f, -1, &[2]),
            poly(&f, 0, &[1, 1]),
            poly(&f, 2, &[2]),
        ]));
        let z = x.sub(&f, &x);
        assert!(z.is_zero());
    }

    #[test]
    fn rho_fixes_teichmuller_rows() {
        let f = fp3();
        let a = poly(&f, 0, &[1, 2]);
        let row = vec![
            PadicElem::from_teich(a.clone(), 2),
            PadicElem::from_teich(poly(&f, 1, &[1]), 2),
        ];
        let r = rho(&f, &[row]);
        assert_eq!(r[0][0], a);
        assert_eq!(r[0][1], poly(&f, 1, &[1]));
    }

    #[test]
    fn rho_normalizes_p_times_teichmuller() {
        // Row (p*[c], 0) over W_2: p[c] = [c] p, so rho gives (0, c).
        let f = fp3();
        let c = poly(&f, 0, &[2, 1]);
        let pc = PadicElem::from_teich(c.clone(), 2).mul_p_pow(1);
        let row = vec![pc, PadicElem::zero(2)];
        let r = rho(&f, &[row]);
        assert!(r[0][0].is_zero());
        assert_eq!(r[0][1], c);
    }

    #[test]
    fn rho_sum_of_teichmullers() {
        // Row ([a]+[b], 0) -> (a+b, S_1(a,b)).
        let f = fp3();
        let a = poly(&f, 0, &[1, 1]);
        let b = poly(&f, 0, &[2, 1]);
        let e = PadicElem::from_teich(a.clone(), 2).add(&f, &PadicElem::from_teich(b.clone(), 2));
        let r = rho(&f, &[vec![e, PadicElem::zero(2)]]);
        assert_eq!(r[0][0], a.add(&f, &b));
        assert_eq!(r[0][1], s_fun(&f, 1, &[a, b]));
    }

    #[test]
    fn rho_identity_through_witt_route() {
        // The defining identity M p* = [rho(M)] p*, verified by evaluating
        // both sides as Laurent series with Witt vector coefficients.
        let fq = std::sync::Arc::new(fp3());
        let wn = WnRing { fq: fq.clone(), len: 3 };
        let f = &*fq;
        let entry = |min: i64, cs: &[i64]| {
            PadicElem::from_digits(vec![
                poly(f, min, cs),
                poly(f, 0, &[1, 2]),
                poly(f, 1, &[2]),
            ])
        };
        let row = vec![entry(0, &[1, 1]), entry(-1, &[2, 0, 1]), entry(2, &[1])];
        let digits = rho(f, &[row.clone()]);
        // left: sum_j row_j p^j; right: sum_j [digits_j] p^j
        let mut lhs: LaurentPoly<WnRing> = LaurentPoly::zero();
        let mut rhs: LaurentPoly<WnRing> = LaurentPoly::zero();
        let mut p_pow = wn.one();
        for j in 0..3 {
            if j > 0 {
                p_pow = wn.mul(&p_pow, &wn.from_i64(3));
            }
            lhs = lhs.add(&wn, &wn.eval_padic(&row[j]).scale(&wn, &p_pow));
            rhs = rhs.add(&wn, &wn.teich_series(&digits[0][j]).scale(&wn, &p_pow));
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn polynomial_plugin_matches_universal_sum_formulas() {
        // Witt addition over the Laurent coefficient plugin agrees with the
        // universal polynomials S_0 = X_0 + Y_0, S_1 = X_1 + Y_1 +
        // sigma_1(X_0, Y_0) evaluated independently via exact division in
        // the torsion-free lift.
        use crate::ring::GhostRing;
        let fq = std::sync::Arc::new(fp3());
        let coeffs = FqPolyCoeffs::new(fq.clone());
        let f = &*fq;
        let enc = |x: &FqPoly| {
            match (x.val(), x.deg()) {
                (Some(lo), Some(hi)) => {
                    let cs: Vec<FqElem> = (lo..=hi).map(|d| x.coeff(f, d)).collect();
                    LaurentPoly::from_coeffs(&FqArc(fq.clone()), lo, cs)
                }
                _ => LaurentPoly::zero(),
            }
        };
        let a = crate::witt::WittVector::new(vec![enc(&poly(f, -1, &[2, 1])), enc(&poly(f, 0, &[1]))]);
        let b = crate::witt::WittVector::new(vec![enc(&poly(f, 0, &[1, 2])), enc(&poly(f, 1, &[2]))]);
        let sum = crate::witt::witt_add(3, &coeffs, &a, &b);
        // independent route over the lift
        let lr = coeffs.lift_ring();
        let la0 = coeffs.lift(&a.coeffs()[0]);
        let lb0 = coeffs.lift(&b.coeffs()[0]);
        let s0 = lr.add(&la0, &lb0);
        assert_eq!(coeffs.reduce(&s0), sum.coeffs()[0]);
        let cube = |x: &LaurentPoly<crate::ring::IntPolyQuot>| lr.mul(&lr.mul(x, x), x);
        let sigma1 = lr
            .div_int_exact(
                &lr.sub(&lr.add(&cube(&la0), &cube(&lb0)), &cube(&s0)),
                &num_bigint::BigInt::from(3),
            )
            .unwrap();
        let s1 = lr.add(
            &lr.add(&coeffs.lift(&a.coeffs()[1]), &coeffs.lift(&b.coeffs()[1])),
            &sigma1,
        );
        assert_eq!(coeffs.reduce(&s1), sum.coeffs()[1]);
    }

    #[test]
    fn frobenius_on_series_and_digits() {
        let f = fp3();
        let a = poly(&f, 1, &[1, 2]); // u + 2u^2
        let fa = series_frobenius(&f, &a);
        assert_eq!(fa, poly(&f, 3, &[1, 0, 0, 2])); // u^3 + 2u^6
        let x = PadicElem::from_digits(vec![a.clone(), poly(&f, 0, &[2])]);
        let fx = x.frobenius(&f);
        assert_eq!(*fx.digit(0), fa);
        assert_eq!(*fx.digit(1), poly(&f, 0, &[2]));
    }
}
