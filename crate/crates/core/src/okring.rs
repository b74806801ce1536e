//! Exact arithmetic in O_K/pi^N for a totally ramified extension of Q_p with
//! residue field F_p, presented by an Eisenstein polynomial E(u).
//!
//! Elements are kept in pi-adic digit normal form: N digits in [0, p), a
//! bijection onto the p^N elements of the quotient. Carries are propagated
//! through a fixed expansion of the integer p in powers of pi, derived from
//! pi^e = -p h(pi) with h read off the Eisenstein coefficients. Every element
//! carries a precision ("known mod pi^prec"); congruence tests error loudly
//! rather than answer optimistically when precision is insufficient.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{GhostRing, IntPolyQuotMod, Ring, WittCoeffs};
use crate::witt::{self, WittVector};

/// Element of O_K/pi^N: digit i is the coefficient of pi^i.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OkElem {
    digits: Vec<u8>,
    prec: i64,
}

impl OkElem {
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_visibly_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn to_json(&self) -> Value {
        let digits: Vec<u64> = self.digits.iter().map(|&d| d as u64).collect();
        json!({ "digits": digits, "precision": self.prec })
    }
}

/// Valuation of an element known to finite precision.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Valuation {
    Exact(i64),
    /// All known digits vanish; the valuation is at least this.
    AtLeast(i64),
}

impl Valuation {
    pub fn lower_bound(self) -> i64 {
        match self {
            Valuation::Exact(v) => v,
            Valuation::AtLeast(v) => v,
        }
    }
}

/// Context for O_K/pi^N: the prime, ramification index, Eisenstein
/// coefficients, and working precisions.
#[derive(Debug)]
pub struct OkContext {
    pub p: u64,
    pub e: i64,
    /// Lower coefficients c_0..c_(e-1) of E(u) = u^e + ... + c_0.
    pub e_coeffs: Vec<i64>,
    /// pi-adic working precision N.
    pub n_prec: i64,
    /// p-adic precision M with p^M = 0 mod pi^N.
    pub m_prec: u32,
    /// Expansion P(x) with P(pi) = p mod pi^N, small coefficients.
    p_expansion: Vec<i128>,
    /// Ghost lift ring Z[x]/(E, p^K).
    lift: IntPolyQuotMod,
    /// Powers x^i mod (E, p^K) for i < N.
    x_powers: Vec<Vec<i128>>,
}

impl OkContext {
    /// `witt_budget` is the extra p-precision reserved for ghost divisions;
    /// it must be at least the largest Witt length used with this context.
    pub fn new(p: u64, e: i64, e_coeffs: &[i64], n_prec: i64, witt_budget: u32) -> Result<Self> {
        if p < 3 {
            return Err(Error::Invalid("p must be an odd prime >= 3".into()));
        }
        if e < 1 || e_coeffs.len() != e as usize {
            return Err(Error::Invalid("need exactly e lower Eisenstein coefficients".into()));
        }
        for (j, &c) in e_coeffs.iter().enumerate() {
            if c % p as i64 != 0 {
                return Err(Error::Invalid(format!("coefficient of u^{j} not divisible by p")));
            }
        }
        if (e_coeffs[0] / p as i64) % p as i64 == 0 {
            return Err(Error::Invalid("constant term must have p-valuation exactly 1".into()));
        }
        let m_prec = (n_prec as u32).div_ceil(e as u32) + 1;
        let k = m_prec + witt_budget + 1;
        // i128 headroom: coefficient convolutions of residues mod p^(k)
        // must not wrap.
        let bits = (k as f64 + 1.0) * (p as f64).log2();
        if bits > 58.0 {
            return Err(Error::Invalid(format!(
                "requested precision needs p^{k} coefficient arithmetic, beyond the i128 kernel"
            )));
        }

        // pi^e = -sum c_j pi^j = p h(pi) with h_j = -c_j/p, a unit series,
        // so p = x^e h(x)^(-1) as an expansion in powers of pi.
        let pm = (p as i128).pow(m_prec + 1);
        let h: Vec<i128> = e_coeffs.iter().map(|&c| (-(c / p as i64)) as i128).collect();
        let h_inv = invert_series_mod(&h, n_prec as usize, pm);
        let mut p_expansion = vec![0i128; n_prec as usize];
        for (i, &c) in h_inv.iter().enumerate() {
            let deg = i + e as usize;
            if deg < n_prec as usize {
                p_expansion[deg] = c.rem_euclid(pm);
            }
        }

        let mut modulus: Vec<i128> = e_coeffs.iter().map(|&c| c as i128).collect();
        modulus.push(1);
        let lift = IntPolyQuotMod::new(modulus, p, k);
        let mut x_powers = Vec::with_capacity(n_prec as usize);
        let mut cur = lift.one();
        for _ in 0..n_prec {
            x_powers.push(cur.clone());
            cur = lift.mul(&cur, &x_monomial(&lift));
        }

        let ctx = OkContext { p, e, e_coeffs: e_coeffs.to_vec(), n_prec, m_prec, p_expansion, lift, x_powers };

        // Consistency of the carry expansion: p h(pi) must come out as pi^e.
        let p_elem = ctx.from_int(p as i64);
        match ctx.valuation(&p_elem) {
            Valuation::Exact(v) if v == e => {}
            Valuation::AtLeast(v) if v >= e => {}
            v => return Err(Error::Invalid(format!("p has pi-valuation {v:?}, expected {e}"))),
        }
        let mut hw = vec![0i128; ctx.n_prec as usize];
        for (j, &hj) in h.iter().enumerate() {
            hw[j] = hj;
        }
        let h_elem = ctx.normalize(hw);
        if ctx.ok_mul(&p_elem, &h_elem) != ctx.pi_pow(e) {
            return Err(Error::Invalid("carry expansion inconsistent with E(u)".into()));
        }
        Ok(ctx)
    }

    /// Default precision policy: N = p (l_1 + ... + l_n) + e + 2 covers every
    /// modulus appearing in the n <= 3 finiteness congruences.
    pub fn with_default_precision(p: u64, e: i64, e_coeffs: &[i64], l_sum: i64) -> Result<Self> {
        let n = p as i64 * l_sum + e + 2;
        OkContext::new(p, e, e_coeffs, n, 8)
    }

    pub fn n(&self) -> i64 {
        self.n_prec
    }

    /// Digit normal form of an integer-coefficient combination of powers of
    /// pi, with the stated precision.
    fn normalize_with_prec(&self, mut work: Vec<i128>, prec: i64) -> OkElem {
        let n = self.n_prec as usize;
        work.resize(n, 0);
        let p = self.p as i128;
        let mut digits = vec![0u8; n];
        for i in 0..n {
            // Reduce to the precision actually relevant at this position.
            let mi = ((self.n_prec - i as i64) as u32).div_ceil(self.e as u32) + 1;
            let pmi = p.pow(mi);
            let v = work[i].rem_euclid(pmi);
            let d = v % p;
            digits[i] = d as u8;
            let q = (v - d) / p;
            if q != 0 {
                for (k, &c) in self.p_expansion.iter().enumerate() {
                    if c != 0 && i + k < n {
                        work[i + k] += q * c;
                    }
                }
            }
        }
        let prec = prec.min(self.n_prec);
        for d in digits.iter_mut().skip(prec.max(0) as usize) {
            *d = 0;
        }
        OkElem { digits, prec }
    }

    pub fn normalize(&self, work: Vec<i128>) -> OkElem {
        self.normalize_with_prec(work, self.n_prec)
    }

    pub fn from_int(&self, k: i64) -> OkElem {
        let mut work = vec![0i128; self.n_prec as usize];
        work[0] = k as i128;
        self.normalize(work)
    }

    pub fn pi_pow(&self, l: i64) -> OkElem {
        assert!(l >= 0);
        let mut work = vec![0i128; self.n_prec as usize];
        if (l as usize) < work.len() {
            work[l as usize] = 1;
        }
        self.normalize(work)
    }

    pub fn from_digits(&self, digits: &[u8], prec: i64) -> OkElem {
        let work: Vec<i128> = digits.iter().map(|&d| d as i128).collect();
        self.normalize_with_prec(work, prec)
    }

    pub fn elem_from_json(&self, v: &Value) -> Result<OkElem> {
        let digits = v["digits"]
            .as_array()
            .ok_or_else(|| Error::Invalid("missing digits".into()))?
            .iter()
            .map(|x| x.as_u64().map(|d| d as u8).ok_or_else(|| Error::Invalid("bad digit".into())))
            .collect::<Result<Vec<u8>>>()?;
        let prec = v["precision"].as_i64().unwrap_or(self.n_prec);
        Ok(self.from_digits(&digits, prec))
    }

    pub fn ok_add(&self, a: &OkElem, b: &OkElem) -> OkElem {
        let n = self.n_prec as usize;
        let mut work = vec![0i128; n];
        for i in 0..n {
            work[i] = a.digits[i] as i128 + b.digits[i] as i128;
        }
        self.normalize_with_prec(work, a.prec.min(b.prec))
    }

    pub fn ok_neg(&self, a: &OkElem) -> OkElem {
        let work: Vec<i128> = a.digits.iter().map(|&d| -(d as i128)).collect();
        self.normalize_with_prec(work, a.prec)
    }

    pub fn ok_sub(&self, a: &OkElem, b: &OkElem) -> OkElem {
        self.ok_add(a, &self.ok_neg(b))
    }

    pub fn ok_mul(&self, a: &OkElem, b: &OkElem) -> OkElem {
        let n = self.n_prec as usize;
        let mut work = vec![0i128; n];
        for (i, &da) in a.digits.iter().enumerate() {
            if da == 0 {
                continue;
            }
            for (j, &db) in b.digits.iter().enumerate() {
                if i + j < n && db != 0 {
                    work[i + j] += da as i128 * db as i128;
                }
            }
        }
        let va = self.valuation(a).lower_bound();
        let vb = self.valuation(b).lower_bound();
        let prec = (a.prec + vb).min(b.prec + va).min(self.n_prec);
        self.normalize_with_prec(work, prec)
    }

    pub fn ok_pow(&self, a: &OkElem, k: u64) -> OkElem {
        let mut acc = self.from_int(1);
        let mut base = a.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.ok_mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.ok_mul(&base, &base);
            }
        }
        acc
    }

    pub fn valuation(&self, a: &OkElem) -> Valuation {
        match a.digits.iter().position(|&d| d != 0) {
            Some(i) => Valuation::Exact(i as i64),
            None => Valuation::AtLeast(a.prec),
        }
    }

    /// Exact division by pi^l.
    pub fn div_pi(&self, a: &OkElem, l: i64) -> Result<OkElem> {
        if l == 0 {
            return Ok(a.clone());
        }
        match self.valuation(a) {
            Valuation::Exact(v) if v < l => {
                Err(Error::NotDivisible { valuation: v, requested: l })
            }
            Valuation::AtLeast(v) if v < l => {
                Err(Error::PrecisionShortfall { needed: l, have: v })
            }
            _ => {
                let digits: Vec<u8> = a.digits.iter().skip(l as usize).cloned().collect();
                let mut digits = digits;
                digits.resize(self.n_prec as usize, 0);
                Ok(OkElem { digits, prec: (a.prec - l).min(self.n_prec) })
            }
        }
    }

    /// Whether a = 0 mod pi^m, erring loudly on insufficient precision.
    pub fn is_zero_mod(&self, a: &OkElem, m: i64) -> Result<bool> {
        if let Some(i) = a.digits.iter().take(m.min(a.prec).max(0) as usize).position(|&d| d != 0) {
            let _ = i;
            return Ok(false);
        }
        if a.prec < m {
            return Err(Error::PrecisionShortfall { needed: m, have: a.prec });
        }
        Ok(true)
    }

    pub fn congruent_mod(&self, a: &OkElem, b: &OkElem, m: i64) -> Result<bool> {
        self.is_zero_mod(&self.ok_sub(a, b), m)
    }

    /// Truncate to the residue mod pi^m (canonical digit representative).
    pub fn reduce_mod(&self, a: &OkElem, m: i64) -> OkElem {
        let mut digits = a.digits.clone();
        for d in digits.iter_mut().skip(m.max(0) as usize) {
            *d = 0;
        }
        OkElem { digits, prec: a.prec }
    }

    pub fn clamp_prec(&self, a: &OkElem, prec: i64) -> OkElem {
        if prec >= a.prec {
            a.clone()
        } else {
            let mut digits = a.digits.clone();
            for d in digits.iter_mut().skip(prec.max(0) as usize) {
                *d = 0;
            }
            OkElem { digits, prec }
        }
    }

    /// Teichmüller representative of c in F_p, as an element of O_K/pi^N.
    pub fn teichmuller_int(&self, c: u64) -> OkElem {
        let m = self.m_prec + 1;
        let pm = (self.p as i128).pow(m);
        let w = pow_mod(c as i128 % self.p as i128, (self.p as i128).pow(m - 1), pm);
        let mut work = vec![0i128; self.n_prec as usize];
        work[0] = w;
        self.normalize(work)
    }

    /// sigma_1(a,b) = (a^p + b^p - (a+b)^p)/p, computed exactly over the lift.
    pub fn sigma(&self, i: usize, a: &OkElem, b: &OkElem) -> OkElem {
        assert!(i == 1 || i == 2);
        let lr = &self.lift;
        let la = self.lift_elem(a);
        let lb = self.lift_elem(b);
        let p = self.p;
        let pe1 = lr.pow(&la, p);
        let pe2 = lr.pow(&lb, p);
        let sum = lr.add(&la, &lb);
        let pe3 = lr.pow(&sum, p);
        let num1 = lr.sub(&lr.add(&pe1, &pe2), &pe3);
        let s1 = lr
            .div_int_exact(&num1, &num_bigint::BigInt::from(p))
            .expect("binomial integrality");
        let prec_in = a.prec.min(b.prec);
        if i == 1 {
            return self.clamp_prec(&self.reduce_lift(&s1), prec_in - self.e);
        }
        let q1 = lr.pow(&la, p * p);
        let q2 = lr.pow(&lb, p * p);
        let q3 = lr.pow(&sum, p * p);
        let s1p = lr.pow(&s1, p);
        let num2 = lr.sub(
            &lr.sub(&lr.add(&q1, &q2), &q3),
            &lr.mul_int(&s1p, &num_bigint::BigInt::from(p)),
        );
        let s2 = lr
            .div_int_exact(&num2, &num_bigint::BigInt::from((p * p) as i64))
            .expect("binomial integrality");
        self.clamp_prec(&self.reduce_lift(&s2), prec_in - 2 * self.e)
    }

    pub(crate) fn lift_elem(&self, a: &OkElem) -> Vec<i128> {
        let mut acc = self.lift.zero();
        for (i, &d) in a.digits.iter().enumerate() {
            if d != 0 {
                let term: Vec<i128> = self.x_powers[i].iter().map(|&c| c * d as i128).collect();
                acc = self.lift.add(&acc, &self.lift.reduce_elem(term));
            }
        }
        acc
    }

    pub(crate) fn reduce_lift(&self, v: &[i128]) -> OkElem {
        // A lift-ring element is a polynomial of degree < e in pi.
        let mut work = vec![0i128; self.n_prec as usize];
        for (i, &c) in v.iter().enumerate() {
            if i < work.len() {
                work[i] = c;
            }
        }
        self.normalize(work)
    }
}

/// Small helper so IntPolyQuotMod can renormalize externally built vectors.
trait ReduceElem {
    fn reduce_elem(&self, v: Vec<i128>) -> Vec<i128>;
}

impl ReduceElem for IntPolyQuotMod {
    fn reduce_elem(&self, v: Vec<i128>) -> Vec<i128> {
        // add zero: runs the internal normalization
        self.add(&v, &self.zero())
    }
}

fn x_monomial(r: &IntPolyQuotMod) -> Vec<i128> {
    let mut v = r.zero();
    if v.len() > 1 {
        v[1] = 1;
    } else {
        // degree-1 modulus: x reduces to a constant
        v = r.from_i64(0);
    }
    v
}

/// Invert a series with unit constant term mod (x^n, modulus m).
fn invert_series_mod(h: &[i128], n: usize, m: i128) -> Vec<i128> {
    let h0 = h[0].rem_euclid(m);
    let h0_inv = mod_inverse(h0, m);
    let mut out = vec![0i128; n];
    out[0] = h0_inv;
    for k in 1..n {
        let mut acc: i128 = 0;
        for j in 0..k {
            let hc = if k - j < h.len() { h[k - j].rem_euclid(m) } else { 0 };
            if hc != 0 {
                acc = (acc + hc * out[j]).rem_euclid(m);
            }
        }
        out[k] = (-(h0_inv * acc)).rem_euclid(m);
    }
    out
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    // extended Euclid; a must be a unit mod m
    let (mut r0, mut r1) = (m, a.rem_euclid(m));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "not a unit");
    t0.rem_euclid(m)
}

fn pow_mod(mut base: i128, mut exp: i128, m: i128) -> i128 {
    base = base.rem_euclid(m);
    let mut acc: i128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc * base).rem_euclid(m);
        }
        exp >>= 1;
        base = (base * base).rem_euclid(m);
    }
    acc
}

/// Teichmüller p-adic digits of an integer: c = sum [c_i] p^i in Z_p.
pub fn int_teich_digits(p: u64, c: i64, count: usize) -> Vec<u64> {
    let m = count as u32 + 2;
    let pm = (p as i128).pow(m);
    let mut x = (c as i128).rem_euclid(pm);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let d = (x % p as i128) as u64;
        out.push(d);
        let w = pow_mod(d as i128, (p as i128).pow(m - 1), pm);
        x = ((x - w).rem_euclid(pm)) / p as i128;
    }
    out
}

impl Ring for OkContext {
    type Elem = OkElem;

    fn zero(&self) -> OkElem {
        OkElem { digits: vec![0; self.n_prec as usize], prec: self.n_prec }
    }
    fn one(&self) -> OkElem {
        self.from_int(1)
    }
    fn add(&self, a: &OkElem, b: &OkElem) -> OkElem {
        self.ok_add(a, b)
    }
    fn neg(&self, a: &OkElem) -> OkElem {
        self.ok_neg(a)
    }
    fn mul(&self, a: &OkElem, b: &OkElem) -> OkElem {
        self.ok_mul(a, b)
    }
    fn from_i64(&self, n: i64) -> OkElem {
        self.from_int(n)
    }
    fn is_zero(&self, a: &OkElem) -> bool {
        a.is_visibly_zero()
    }
}

impl WittCoeffs for OkContext {
    type Lift = IntPolyQuotMod;

    fn lift_ring(&self) -> &IntPolyQuotMod {
        &self.lift
    }
    fn lift(&self, a: &OkElem) -> Vec<i128> {
        self.lift_elem(a)
    }
    fn reduce(&self, a: &Vec<i128>) -> OkElem {
        self.reduce_lift(a)
    }
}

/// F^(l) = F - [pi^((p-1) l)] . (-), the twisted Frobenius on Witt vectors.
pub fn f_level(ctx: &OkContext, l: i64, a: &WittVector<OkElem>) -> WittVector<OkElem> {
    let fa = witt::frobenius(ctx.p, ctx, a);
    let tw = witt::witt_mul(
        ctx.p,
        ctx,
        &witt::teichmuller(ctx, &ctx.pi_pow((ctx.p as i64 - 1) * l), a.len()),
        a,
    );
    witt::witt_sub(ctx.p, ctx, &fa, &tw)
}
