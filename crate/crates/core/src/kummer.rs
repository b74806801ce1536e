//! Frame matrices over W(O_K/pi^N) and the Kummer finiteness machinery:
//! the T-multiplication and its divisions, membership in the filtered-group
//! matrix set, equivalence of frames, explicit finiteness congruences for
//! n = 2 and n = 3, the isogeny-pair check, truncated deformed exponentials,
//! Hopf algebra presentations, and an independent polynomial-level
//! integrality oracle.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::okring::{OkContext, OkElem};
use crate::ring::Ring;
use crate::witt::{self, WittVector};

pub type OkWitt = WittVector<OkElem>;
pub type OkWittMat = Vec<Vec<OkWitt>>;

/// Default stored Witt length for frame computations at n <= 3.
pub const DEFAULT_WITT_LEN: usize = 5;

/// Upper triangular frame matrix with implicit Teichmüller diagonal
/// [pi^(l_i)] and finite Witt vector entries.
#[derive(Clone, Debug)]
pub struct SSMatrix {
    n: usize,
    l: Vec<i64>,
    entries: Vec<OkWitt>,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    let before = i * (2 * n - i - 1) / 2;
    before + (j - i - 1)
}

impl SSMatrix {
    pub fn diagonal(ctx: &OkContext, l: Vec<i64>) -> Self {
        let n = l.len();
        let zero = WittVector::new(vec![ctx.zero()]);
        SSMatrix { n, l, entries: vec![zero; n * (n - 1) / 2] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn exponents(&self) -> &[i64] {
        &self.l
    }

    pub fn entry(&self, i: usize, j: usize) -> &OkWitt {
        &self.entries[upper_index(self.n, i, j)]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: OkWitt) {
        self.entries[upper_index(self.n, i, j)] = v;
    }

    /// Teichmüller-entry matrix of size 3 from scalar parameters.
    pub fn teichmuller3(ctx: &OkContext, l: [i64; 3], a12: &OkElem, a13: &OkElem, a23: &OkElem) -> Self {
        let mut m = SSMatrix::diagonal(ctx, l.to_vec());
        m.set_entry(0, 1, WittVector::new(vec![a12.clone()]));
        m.set_entry(0, 2, WittVector::new(vec![a13.clone()]));
        m.set_entry(1, 2, WittVector::new(vec![a23.clone()]));
        m
    }

    pub fn teichmuller2(ctx: &OkContext, l: [i64; 2], a12: &OkElem) -> Self {
        let mut m = SSMatrix::diagonal(ctx, l.to_vec());
        m.set_entry(0, 1, WittVector::new(vec![a12.clone()]));
        m
    }

    /// Longest stored entry support; working lengths must dominate it so
    /// that no component is silently dropped.
    pub fn max_support(&self) -> usize {
        self.entries.iter().map(|e| e.len()).max().unwrap_or(1)
    }

    /// A working length that can hold this frame's entries and the residual
    /// chains of one division pass.
    pub fn working_len(&self, wlen: usize) -> usize {
        wlen.max(self.max_support() + 2)
    }

    /// Materialize with every entry padded to the working length.
    pub fn to_full(&self, ctx: &OkContext, wlen: usize) -> OkWittMat {
        let wlen = self.working_len(wlen);
        let zero = witt::witt_zero(ctx, wlen);
        let mut m = vec![vec![zero; self.n]; self.n];
        for i in 0..self.n {
            m[i][i] = witt::teichmuller(ctx, &ctx.pi_pow(self.l[i]), wlen);
            for j in (i + 1)..self.n {
                m[i][j] = witt::padded(ctx, self.entry(i, j), wlen);
            }
        }
        m
    }

    /// Delete the last row and column.
    pub fn upper(&self, ctx: &OkContext) -> SSMatrix {
        self.shrink(ctx, 0)
    }

    /// Delete the first row and column.
    pub fn lower(&self, ctx: &OkContext) -> SSMatrix {
        self.shrink(ctx, 1)
    }

    fn shrink(&self, ctx: &OkContext, offset: usize) -> SSMatrix {
        assert!(self.n >= 2);
        let n = self.n - 1;
        let l: Vec<i64> = (0..n).map(|i| self.l[i + offset]).collect();
        let mut out = SSMatrix::diagonal(ctx, l);
        for i in 0..n {
            for j in (i + 1)..n {
                out.set_entry(i, j, self.entry(i + offset, j + offset).clone());
            }
        }
        out
    }

    /// Entrywise Witt Frobenius; the diagonal becomes [pi^(p l_i)].
    pub fn frobenius(&self, ctx: &OkContext) -> Self {
        let l: Vec<i64> = self.l.iter().map(|&x| x * ctx.p as i64).collect();
        let mut out = SSMatrix::diagonal(ctx, l);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                out.set_entry(i, j, witt::frobenius(ctx.p, ctx, self.entry(i, j)));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut entries = serde_json::Map::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let e = self.entry(i, j);
                if e.coeffs().iter().any(|c| !c.is_visibly_zero()) {
                    let comps: Vec<Value> = e.coeffs().iter().map(|c| c.to_json()).collect();
                    entries.insert(format!("{},{}", i + 1, j + 1), Value::Array(comps));
                }
            }
        }
        json!({ "n": self.n, "l": self.l, "entries": Value::Object(entries) })
    }

    pub fn from_json(ctx: &OkContext, v: &Value) -> Result<Self> {
        let n = v["n"].as_u64().ok_or_else(|| Error::Invalid("missing n".into()))? as usize;
        let l: Vec<i64> = v["l"]
            .as_array()
            .ok_or_else(|| Error::Invalid("missing l".into()))?
            .iter()
            .map(|x| x.as_i64().unwrap_or(0))
            .collect();
        if l.len() != n {
            return Err(Error::Invalid("l has wrong length".into()));
        }
        let mut m = SSMatrix::diagonal(ctx, l);
        if let Some(map) = v["entries"].as_object() {
            for (key, ev) in map {
                let parts: Vec<&str> = key.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::Invalid(format!("bad entry key {key}")));
                }
                let i: usize = parts[0].trim().parse().map_err(|_| Error::Invalid("bad index".into()))?;
                let j: usize = parts[1].trim().parse().map_err(|_| Error::Invalid("bad index".into()))?;
                if !(1 <= i && i < j && j <= n) {
                    return Err(Error::Invalid(format!("entry ({i},{j}) not strictly upper")));
                }
                let comps = ev
                    .as_array()
                    .ok_or_else(|| Error::Invalid("entry must be a component list".into()))?
                    .iter()
                    .map(|c| ctx.elem_from_json(c))
                    .collect::<Result<Vec<_>>>()?;
                m.set_entry(i - 1, j - 1, WittVector::new(comps));
            }
        }
        Ok(m)
    }
}

fn vec_min_prec(ctx: &OkContext, a: &OkWitt) -> i64 {
    a.coeffs().iter().map(|c| c.precision()).min().unwrap_or(ctx.n())
}

fn vec_is_zero(a: &OkWitt) -> bool {
    a.coeffs().iter().all(|c| c.is_visibly_zero())
}

fn clamp_vec(ctx: &OkContext, a: OkWitt, prec: i64) -> OkWitt {
    WittVector::new(a.coeffs().iter().map(|c| ctx.clamp_prec(c, prec)).collect())
}

/// T-multiplication of raw matrices: entry (i,j) = sum_k T_(m_ik)(n_kj).
pub fn star_t(ctx: &OkContext, m: &OkWittMat, nm: &OkWittMat, wlen: usize) -> OkWittMat {
    let n = m.len();
    let mut out = vec![vec![witt::witt_zero(ctx, wlen); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = witt::witt_zero(ctx, wlen);
            let mut prec = ctx.n();
            for (k, me) in m[i].iter().enumerate() {
                let ne = &nm[k][j];
                prec = prec.min(vec_min_prec(ctx, me)).min(vec_min_prec(ctx, ne));
                if vec_is_zero(me) || vec_is_zero(ne) {
                    continue;
                }
                let term = witt::t_operator(ctx.p, ctx, me, ne, wlen);
                acc = witt::witt_add(ctx.p, ctx, &acc, &term);
            }
            out[i][j] = clamp_vec(ctx, acc, prec);
        }
    }
    out
}

/// Result of a T-division attempt: the quotient, or the witness that the
/// quotient fails positivity at a named entry component.
pub enum DivOutcome {
    Quotient(OkWittMat),
    NotDivisible { row: usize, col: usize, component: usize },
}

impl DivOutcome {
    pub fn is_positive(&self) -> bool {
        matches!(self, DivOutcome::Quotient(_))
    }
}

/// Solve Q star_T A = C for Q by increasing distance to the diagonal; at
/// each entry the unknown satisfies pi^(l_j) . q_ij = residual, resolved by
/// exact componentwise division. A is upper triangular with Teichmüller
/// diagonal [pi^(l_j)] given through `a_diag_exp`.
pub fn rdiv_t(
    ctx: &OkContext,
    c: &OkWittMat,
    a: &OkWittMat,
    a_diag_exp: &[i64],
    wlen: usize,
) -> Result<DivOutcome> {
    let n = c.len();
    let mut q = vec![vec![witt::witt_zero(ctx, wlen); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut residual = witt::padded(ctx, &c[i][j], wlen);
            let mut prec = vec_min_prec(ctx, &residual);
            for k in i..j {
                let qe = &q[i][k];
                let ae = &a[k][j];
                prec = prec.min(vec_min_prec(ctx, qe)).min(vec_min_prec(ctx, ae));
                if vec_is_zero(qe) || vec_is_zero(ae) {
                    continue;
                }
                let term = witt::t_operator(ctx.p, ctx, qe, ae, wlen);
                residual = witt::witt_sub(ctx.p, ctx, &residual, &term);
            }
            let residual = clamp_vec(ctx, residual, prec);
            let lj = a_diag_exp[j];
            let mut comps = Vec::with_capacity(wlen);
            for (t, comp) in residual.coeffs().iter().enumerate() {
                match ctx.div_pi(comp, lj) {
                    Ok(x) => comps.push(x),
                    Err(Error::NotDivisible { .. }) => {
                        return Ok(DivOutcome::NotDivisible { row: i, col: j, component: t })
                    }
                    Err(e) => return Err(e),
                }
            }
            q[i][j] = WittVector::new(comps);
        }
    }
    Ok(DivOutcome::Quotient(q))
}

/// Membership in the filtered-group matrix set: F(A)/A >= 0.
pub fn in_mn(ctx: &OkContext, a: &SSMatrix, wlen: usize) -> Result<bool> {
    let wlen = a.working_len(wlen);
    let fa = a.frobenius(ctx).to_full(ctx, wlen);
    let full = a.to_full(ctx, wlen);
    Ok(rdiv_t(ctx, &fa, &full, a.exponents(), wlen)?.is_positive())
}

/// Equivalence of frames: A/A' exists, positive and unitriangular.
pub fn equiv(ctx: &OkContext, a: &SSMatrix, a_prime: &SSMatrix, wlen: usize) -> Result<bool> {
    if a.exponents() != a_prime.exponents() {
        return Ok(false);
    }
    let wlen = a.working_len(wlen).max(a_prime.working_len(wlen));
    let fa = a.to_full(ctx, wlen);
    let fb = a_prime.to_full(ctx, wlen);
    match rdiv_t(ctx, &fa, &fb, a_prime.exponents(), wlen)? {
        DivOutcome::NotDivisible { .. } => Ok(false),
        DivOutcome::Quotient(q) => {
            for (i, row) in q.iter().enumerate() {
                for (t, comp) in row[i].coeffs().iter().enumerate() {
                    let diff = if t == 0 { ctx.ok_sub(comp, &ctx.one()) } else { comp.clone() };
                    if !ctx.is_zero_mod(&diff, comp.precision().max(1))? {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Teichmüller-entry membership congruences at n = 3 for an ordered type
/// l1 >= l2 >= l3: a12^p = 0 mod pi^(l2), a23^p = 0 mod pi^(l3),
/// pi^(l2) a13^p = a23 a12^p mod pi^(l2 + l3).
pub fn in_m3_teich(
    ctx: &OkContext,
    l: [i64; 3],
    a12: &OkElem,
    a13: &OkElem,
    a23: &OkElem,
) -> Result<bool> {
    let p = ctx.p;
    let a12p = ctx.ok_pow(a12, p);
    let a23p = ctx.ok_pow(a23, p);
    let a13p = ctx.ok_pow(a13, p);
    if !ctx.is_zero_mod(&a12p, l[1])? || !ctx.is_zero_mod(&a23p, l[2])? {
        return Ok(false);
    }
    let lhs = ctx.ok_mul(&ctx.pi_pow(l[1]), &a13p);
    let rhs = ctx.ok_mul(a23, &a12p);
    ctx.congruent_mod(&lhs, &rhs, l[1] + l[2])
}

/// Perturbation hooks for the negative-control suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KummerTweak {
    None,
    /// Perturb the pi^(p l2) modulus of the first finiteness congruence.
    FirstModulus(i64),
    /// Perturb the pi^(p l3) modulus of the last finiteness congruence.
    LastModulus(i64),
}

/// Finiteness of the rank-p^2 Kummer subgroup for Teichmüller parameters:
/// e/(p-1) >= l1 >= l2 >= 0, a12^p = 0 mod pi^(l2), and
/// p a12 - pi^(l1) - (p/pi^((p-1) l1)) a12^p = 0 mod pi^(p l2).
pub fn check_kummer_n2(ctx: &OkContext, l1: i64, l2: i64, a12: &OkElem) -> Result<bool> {
    check_kummer_n2_tweaked(ctx, l1, l2, a12, KummerTweak::None)
}

pub fn check_kummer_n2_tweaked(
    ctx: &OkContext,
    l1: i64,
    l2: i64,
    a12: &OkElem,
    tweak: KummerTweak,
) -> Result<bool> {
    let p = ctx.p as i64;
    if !(0 <= l2 && l2 <= l1 && (p - 1) * l1 <= ctx.e) {
        return Ok(false);
    }
    let a12p = ctx.ok_pow(a12, p as u64);
    if !ctx.is_zero_mod(&a12p, l2)? {
        return Ok(false);
    }
    let omega = ctx.div_pi(&ctx.from_int(p), (p - 1) * l1)?;
    let lhs = ctx.ok_sub(
        &ctx.ok_sub(&ctx.ok_mul(&ctx.from_int(p), a12), &ctx.pi_pow(l1)),
        &ctx.ok_mul(&omega, &a12p),
    );
    let delta = match tweak {
        KummerTweak::FirstModulus(d) | KummerTweak::LastModulus(d) => d,
        KummerTweak::None => 0,
    };
    ctx.is_zero_mod(&lhs, (p * l2 + delta).max(0))
}

/// Finiteness of the rank-p^3 Kummer subgroup for a Teichmüller frame in
/// the membership set; valid for l1 >= p l3 and rejected loudly otherwise.
pub fn check_kummer_n3(
    ctx: &OkContext,
    l: [i64; 3],
    a12: &OkElem,
    a13: &OkElem,
    a23: &OkElem,
) -> Result<bool> {
    check_kummer_n3_tweaked(ctx, l, a12, a13, a23, KummerTweak::None)
}

pub fn check_kummer_n3_tweaked(
    ctx: &OkContext,
    l: [i64; 3],
    a12: &OkElem,
    a13: &OkElem,
    a23: &OkElem,
    tweak: KummerTweak,
) -> Result<bool> {
    let p = ctx.p as i64;
    let [l1, l2, l3] = l;
    if l1 < p * l3 {
        return Err(Error::OutOfScope(format!(
            "finiteness congruences require l1 >= p l3 (got l1={l1}, l3={l3})"
        )));
    }
    if !(0 <= l3 && l3 <= l2 && l2 <= l1 && (p - 1) * l1 <= ctx.e) {
        return Ok(false);
    }
    if !in_m3_teich(ctx, l, a12, a13, a23)? {
        return Ok(false);
    }
    let (d1, d3) = match tweak {
        KummerTweak::None => (0, 0),
        KummerTweak::FirstModulus(d) => (d, 0),
        KummerTweak::LastModulus(d) => (0, d),
    };
    let a12p = ctx.ok_pow(a12, p as u64);
    let a23p = ctx.ok_pow(a23, p as u64);
    let a13p = ctx.ok_pow(a13, p as u64);
    let om1 = ctx.div_pi(&ctx.from_int(p), (p - 1) * l1)?;
    let om2 = ctx.div_pi(&ctx.from_int(p), (p - 1) * l2)?;
    let lhs1 = ctx.ok_sub(
        &ctx.ok_sub(&ctx.ok_mul(&ctx.from_int(p), a12), &ctx.pi_pow(l1)),
        &ctx.ok_mul(&om1, &a12p),
    );
    if !ctx.is_zero_mod(&lhs1, (p * l2 + d1).max(0))? {
        return Ok(false);
    }
    let lhs2 = ctx.ok_sub(
        &ctx.ok_sub(&ctx.ok_mul(&ctx.from_int(p), a23), &ctx.pi_pow(l2)),
        &ctx.ok_mul(&om2, &a23p),
    );
    if !ctx.is_zero_mod(&lhs2, p * l3)? {
        return Ok(false);
    }
    let quot = ctx.div_pi(&lhs1, p * l2)?;
    let lhs3 = ctx.ok_sub(
        &ctx.ok_mul(&om1, &a13p),
        &ctx.ok_sub(
            &ctx.ok_sub(&ctx.ok_mul(&ctx.from_int(p), a13), a12),
            &ctx.ok_mul(&a23p, &quot),
        ),
    );
    ctx.is_zero_mod(&lhs3, (p * l3 + d3).max(0))
}

/// The isogeny-pair condition: both frames belong to the matrix set and
/// (pA - PUA)/B >= 0, where B must have exponents p l_i.
pub fn check_isogeny_pair(ctx: &OkContext, a: &SSMatrix, b: &SSMatrix, wlen: usize) -> Result<bool> {
    let n = a.size();
    if b.size() != n {
        return Err(Error::Invalid("size mismatch".into()));
    }
    let expected: Vec<i64> = a.exponents().iter().map(|&x| x * ctx.p as i64).collect();
    if b.exponents() != &expected[..] {
        return Err(Error::Invalid("second frame must have exponents p l_i".into()));
    }
    if !in_mn(ctx, a, wlen)? || !in_mn(ctx, b, wlen)? {
        return Ok(false);
    }
    let wlen = a.working_len(wlen).max(b.working_len(wlen));
    let full = a.to_full(ctx, wlen);
    let mut num = vec![vec![witt::witt_zero(ctx, wlen); n]; n];
    for i in 0..n {
        for j in 0..n {
            num[i][j] = witt::witt_int_mul(ctx.p, ctx, ctx.p as i64, &full[i][j]);
        }
    }
    // subtract the P-shift of the leading (n-1) block
    for r in 0..n.saturating_sub(1) {
        for c in 0..n.saturating_sub(1) {
            if vec_is_zero(&full[r][c]) {
                continue;
            }
            num[r][c + 1] = witt::witt_sub(ctx.p, ctx, &num[r][c + 1], &full[r][c]);
        }
    }
    let bf = b.to_full(ctx, wlen);
    Ok(rdiv_t(ctx, &num, &bf, b.exponents(), wlen)?.is_positive())
}

// ---------------------------------------------------------------------------
// Deformed exponentials
// ---------------------------------------------------------------------------

/// Symbolic coefficients of the one-variable deformed exponential
/// (1 + L T)^(U/L) prod_k (1 + L^(p^k) T^(p^k))^(((U/L)^(p^k) - (U/L)^(p^(k-1)))/p^k).
/// The coefficient of T^m is homogeneous of degree m in (U, L) and is stored
/// as the vector (c_0, ..., c_m) of sum_t c_t U^t L^(m-t).
fn ep_symbolic(p: u64, degree: usize) -> Vec<Vec<BigRational>> {
    static CACHE: Mutex<Option<BTreeMap<(u64, usize), Vec<Vec<BigRational>>>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    let cache = guard.get_or_insert_with(BTreeMap::new);
    if let Some(hit) = cache.get(&(p, degree)) {
        return hit.clone();
    }
    let result = ep_symbolic_compute(p, degree);
    cache.insert((p, degree), result.clone());
    result
}

fn ep_symbolic_compute(p: u64, degree: usize) -> Vec<Vec<BigRational>> {
    let mut series = base_binomial_factor(degree);
    let mut pk = p as usize;
    while pk <= degree {
        let factor = higher_factor(p, pk, degree);
        series = mul_homog_series(&series, &factor, degree);
        pk *= p as usize;
    }
    series
}

fn mul_homog_series(
    a: &[Vec<BigRational>],
    b: &[Vec<BigRational>],
    degree: usize,
) -> Vec<Vec<BigRational>> {
    let mut out: Vec<Vec<BigRational>> =
        (0..=degree).map(|m| vec![BigRational::zero(); m + 1]).collect();
    for (ma, ca) in a.iter().enumerate() {
        for (mb, cb) in b.iter().enumerate() {
            if ma + mb > degree {
                continue;
            }
            for (ta, xa) in ca.iter().enumerate() {
                if xa.is_zero() {
                    continue;
                }
                for (tb, xb) in cb.iter().enumerate() {
                    if !xb.is_zero() {
                        let cell = &mut out[ma + mb][ta + tb];
                        *cell = &*cell + xa * xb;
                    }
                }
            }
        }
    }
    out
}

/// (1 + L T)^(U/L): coefficient of T^j is prod_(i<j) (U - i L) / j!.
fn base_binomial_factor(degree: usize) -> Vec<Vec<BigRational>> {
    let mut out = Vec::with_capacity(degree + 1);
    out.push(vec![BigRational::one()]);
    let mut poly: Vec<BigRational> = vec![BigRational::one()];
    let mut fact = BigInt::one();
    for j in 1..=degree {
        let i = BigRational::from(BigInt::from(j as i64 - 1));
        let mut next = vec![BigRational::zero(); poly.len() + 1];
        for (t, c) in poly.iter().enumerate() {
            next[t + 1] = &next[t + 1] + c;
            next[t] = &next[t] - c * &i;
        }
        poly = next;
        fact *= BigInt::from(j as i64);
        let jf = BigRational::from(fact.clone());
        out.push(poly.iter().map(|c| c / &jf).collect());
    }
    out
}

/// One factor (1 + L^pk T^pk)^A with A = (S^pk - S^(pk/p))/pk, S = U/L.
fn higher_factor(p: u64, pk: usize, degree: usize) -> Vec<Vec<BigRational>> {
    let mut a_poly = vec![BigRational::zero(); pk + 1];
    let pk_rat = BigRational::from(BigInt::from(pk as i64));
    a_poly[pk] = BigRational::one() / &pk_rat;
    a_poly[pk / p as usize] = &a_poly[pk / p as usize] - BigRational::one() / &pk_rat;

    let jmax = degree / pk;
    let mut out: Vec<Vec<BigRational>> =
        (0..=degree).map(|m| vec![BigRational::zero(); m + 1]).collect();
    out[0][0] = BigRational::one();
    let mut prod: Vec<BigRational> = vec![BigRational::one()];
    let mut fact = BigInt::one();
    for j in 1..=jmax {
        let mut shifted = a_poly.clone();
        shifted[0] = &shifted[0] - BigRational::from(BigInt::from(j as i64 - 1));
        prod = mul_q_poly(&prod, &shifted);
        fact *= BigInt::from(j as i64);
        let jf = BigRational::from(fact.clone());
        let m = pk * j;
        let mut cell = vec![BigRational::zero(); m + 1];
        for (t, c) in prod.iter().enumerate() {
            if !c.is_zero() {
                cell[t] = c / &jf;
            }
        }
        out[m] = cell;
    }
    out
}

fn mul_q_poly(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] = &out[i + j] + x * y;
            }
        }
    }
    out
}

/// Specialized truncation of the deformed exponential: coefficients of
/// 1, T, ..., T^D at U = a, Lambda = pi^l, with the p-integrality of every
/// symbolic coefficient asserted before specializing.
#[derive(Clone, Debug)]
pub struct DeformedExp {
    pub coeffs: Vec<OkElem>,
}

pub fn deformed_exp(ctx: &OkContext, a: &OkElem, lam_exp: i64, degree: usize) -> Result<DeformedExp> {
    let table = ep_symbolic(ctx.p, degree);
    let mut a_pows = vec![ctx.one()];
    for _ in 0..degree {
        a_pows.push(ctx.ok_mul(a_pows.last().unwrap(), a));
    }
    let mut coeffs = Vec::with_capacity(degree + 1);
    for (m, row) in table.iter().enumerate() {
        let mut acc = ctx.zero();
        for (t, c) in row.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c_ok = rational_to_ok(ctx, c, m)?;
            let term = ctx.ok_mul(
                &ctx.ok_mul(&c_ok, &a_pows[t]),
                &ctx.pi_pow(lam_exp * (m - t) as i64),
            );
            acc = ctx.ok_add(&acc, &term);
        }
        coeffs.push(acc);
    }
    Ok(DeformedExp { coeffs })
}

/// E_p of a Witt vector: product over components of the one-variable
/// exponentials at Lambda^(p^level), T^(p^level).
pub fn deformed_exp_witt(ctx: &OkContext, a: &OkWitt, lam_exp: i64, degree: usize) -> Result<DeformedExp> {
    let mut out = vec![ctx.zero(); degree + 1];
    out[0] = ctx.one();
    let mut pl = 1usize;
    for (level, comp) in a.coeffs().iter().enumerate() {
        if level > 0 {
            pl *= ctx.p as usize;
        }
        if comp.is_visibly_zero() || pl > degree {
            continue;
        }
        let inner = deformed_exp(ctx, comp, lam_exp * pl as i64, degree / pl)?;
        let mut next = vec![ctx.zero(); degree + 1];
        for (m1, c1) in out.iter().enumerate() {
            if c1.is_visibly_zero() {
                continue;
            }
            for (m2, c2) in inner.coeffs.iter().enumerate() {
                let m = m1 + m2 * pl;
                if m <= degree && !c2.is_visibly_zero() {
                    next[m] = ctx.ok_add(&next[m], &ctx.ok_mul(c1, c2));
                }
            }
        }
        out = next;
    }
    Ok(DeformedExp { coeffs: out })
}

fn rational_to_ok(ctx: &OkContext, c: &BigRational, degree: usize) -> Result<OkElem> {
    let p = BigInt::from(ctx.p);
    if (c.denom() % &p).is_zero() {
        return Err(Error::NotIntegral { degree });
    }
    let m = ctx.m_prec + 1;
    let pm = BigInt::from(ctx.p).pow(m);
    let num = ((c.numer() % &pm) + &pm) % &pm;
    let den = ((c.denom() % &pm) + &pm) % &pm;
    let den_inv = mod_inverse_big(&den, &pm);
    let r = (num * den_inv) % &pm;
    let ri: i64 = r.try_into().map_err(|_| Error::Invalid("residue too large".into()))?;
    Ok(ctx.from_int(ri))
}

fn mod_inverse_big(a: &BigInt, m: &BigInt) -> BigInt {
    let (mut r0, mut r1) = (m.clone(), ((a % m) + m) % m);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let nr = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, nr);
        let nt = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, nt);
    }
    assert!(r0.is_one(), "not a unit");
    ((t0 % m) + m) % m
}

// ---------------------------------------------------------------------------
// Multivariate polynomials over O_K/pi^N and the integrality oracle
// ---------------------------------------------------------------------------

pub const MAX_HOPF_VARS: usize = 4;

/// Dense-exponent multivariate polynomial in up to four variables.
#[derive(Clone, Debug)]
pub struct MultiPoly {
    terms: BTreeMap<[u16; MAX_HOPF_VARS], OkElem>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: OkElem) -> Self {
        let mut t = BTreeMap::new();
        if !c.is_visibly_zero() {
            t.insert([0; MAX_HOPF_VARS], c);
        }
        MultiPoly { terms: t }
    }

    pub fn variable(ctx: &OkContext, var: usize) -> Self {
        let mut exps = [0u16; MAX_HOPF_VARS];
        exps[var] = 1;
        let mut t = BTreeMap::new();
        t.insert(exps, ctx.one());
        MultiPoly { terms: t }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16; MAX_HOPF_VARS], &OkElem)> {
        self.terms.iter()
    }

    pub fn is_visibly_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_visibly_zero())
    }

    pub fn insert_term(&mut self, ctx: &OkContext, exps: [u16; MAX_HOPF_VARS], c: OkElem) {
        if let Some(cur) = self.terms.get_mut(&exps) {
            let s = ctx.ok_add(cur, &c);
            if s.is_visibly_zero() && s.precision() >= ctx.n() {
                self.terms.remove(&exps);
            } else {
                *cur = s;
            }
        } else if !(c.is_visibly_zero() && c.precision() >= ctx.n()) {
            self.terms.insert(exps, c);
        }
    }

    pub fn add(&self, ctx: &OkContext, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(ctx, *e, c.clone());
        }
        out
    }

    pub fn neg(&self, ctx: &OkContext) -> Self {
        MultiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, ctx.ok_neg(c))).collect(),
        }
    }

    pub fn sub(&self, ctx: &OkContext, other: &Self) -> Self {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn mul(&self, ctx: &OkContext, other: &Self) -> Self {
        let mut out = MultiPoly::zero();
        for (e1, c1) in &self.terms {
            if c1.is_visibly_zero() {
                continue;
            }
            for (e2, c2) in &other.terms {
                if c2.is_visibly_zero() {
                    continue;
                }
                let mut e = [0u16; MAX_HOPF_VARS];
                for k in 0..MAX_HOPF_VARS {
                    e[k] = e1[k] + e2[k];
                }
                out.insert_term(ctx, e, ctx.ok_mul(c1, c2));
            }
        }
        out
    }

    pub fn scale(&self, ctx: &OkContext, c: &OkElem) -> Self {
        MultiPoly {
            terms: self.terms.iter().map(|(e, x)| (*e, ctx.ok_mul(c, x))).collect(),
        }
    }

    pub fn pow(&self, ctx: &OkContext, k: u64) -> Self {
        let mut acc = MultiPoly::constant(ctx.one());
        for _ in 0..k {
            acc = acc.mul(ctx, self);
        }
        acc
    }

    /// Remainder modulo a divisor that is monic of degree `deg` in `var`
    /// (leading coefficient exactly T_var^deg with unit coefficient 1).
    pub fn reduce_by(&self, ctx: &OkContext, divisor: &MultiPoly, var: usize, deg: u16) -> Self {
        let mut rem = self.clone();
        loop {
            let target = rem
                .terms
                .iter()
                .filter(|(e, c)| e[var] >= deg && !c.is_visibly_zero())
                .max_by_key(|(e, _)| e[var])
                .map(|(e, c)| (*e, c.clone()));
            let Some((e, c)) = target else { break };
            let mut shift = e;
            shift[var] -= deg;
            // rem -= c T^shift * divisor
            let mut factor = MultiPoly::zero();
            factor.insert_term(ctx, shift, c);
            rem = rem.sub(ctx, &factor.mul(ctx, divisor));
            // the leading term cancels exactly; guard against stalls
            if rem.terms.get(&e).map(|x| !x.is_visibly_zero()).unwrap_or(false) {
                panic!("reduction stalled: divisor not monic in variable {var}");
            }
        }
        rem
    }

    /// Divide every coefficient by pi^k.
    pub fn div_pi(&self, ctx: &OkContext, k: i64) -> Result<Self> {
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            out.insert_term(ctx, *e, ctx.div_pi(c, k)?);
        }
        Ok(out)
    }

    /// Whether every coefficient vanishes mod pi^k.
    pub fn all_zero_mod(&self, ctx: &OkContext, k: i64) -> Result<bool> {
        for c in self.terms.values() {
            if !ctx.is_zero_mod(c, k)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .filter(|(_, c)| !c.is_visibly_zero())
            .map(|(e, c)| json!({ "exps": e.to_vec(), "coeff": c.to_json() }))
            .collect();
        json!(terms)
    }

    /// Human-readable rendering with variables T1, T2, ...
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            if c.is_visibly_zero() {
                continue;
            }
            let mut s = render_coeff(c);
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    s.push_str(&format!("*T{}", v + 1));
                    if k > 1 {
                        s.push_str(&format!("^{k}"));
                    }
                }
            }
            parts.push(s);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

fn render_coeff(c: &OkElem) -> String {
    let mut parts = Vec::new();
    for (i, &d) in c.digits().iter().enumerate() {
        if d != 0 {
            match i {
                0 => parts.push(format!("{d}")),
                1 => parts.push(if d == 1 { "pi".into() } else { format!("{d}*pi") }),
                _ => parts.push(if d == 1 {
                    format!("pi^{i}")
                } else {
                    format!("{d}*pi^{i}")
                }),
            }
        }
    }
    if parts.is_empty() {
        "0".into()
    } else if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("({})", parts.join("+"))
    }
}

/// A Hopf algebra presentation of a Kummer model: the truncated exponentials
/// and the defining equations in the coordinates T1, ..., Tn.
#[derive(Debug)]
pub struct HopfPresentation {
    /// Number of leading positive exponents; levels beyond it are the
    /// unramified multiplicative factor.
    pub positive_levels: usize,
    pub d_polys: Vec<MultiPoly>,
    pub equations: Vec<MultiPoly>,
}

impl HopfPresentation {
    pub fn to_json(&self) -> Value {
        json!({
            "positive_levels": self.positive_levels,
            "d_polys": self.d_polys.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
            "d_rendered": self.d_polys.iter().map(|d| d.render()).collect::<Vec<_>>(),
            "equations": self.equations.iter().map(|q| q.to_json()).collect::<Vec<_>>(),
            "rendered": self.equations.iter().map(|q| q.render()).collect::<Vec<_>>(),
        })
    }
}

/// Internal: the column series of a frame matrix as truncated multivariate
/// polynomials, together with the monic reduction basis of the Kummer ideal.
struct HopfLevels {
    d_polys: Vec<MultiPoly>,
    /// q_j, monic of degree p in T_j; present when all levels so far divide.
    basis: Vec<MultiPoly>,
    /// first level whose raw equation failed divisibility, if any
    failed_level: Option<usize>,
}

/// Valuation rate bookkeeping: coefficient of total degree d has valuation
/// at least d * (num/den).
#[derive(Clone, Copy)]
struct Rate {
    num: i64,
    den: i64,
}

impl Rate {
    fn min(self, other: Rate) -> Rate {
        if self.num * other.den <= other.num * self.den {
            self
        } else {
            other
        }
    }

    fn degree_cap(self, target: i64) -> usize {
        // smallest D with (D+1) * rate > target, i.e. coefficient degrees
        // above D provably vanish mod pi^target
        assert!(self.num > 0, "frame entries must be topologically nilpotent");
        ((target * self.den) / self.num).max(0) as usize + 1
    }
}

fn entry_rate(ctx: &OkContext, a: &OkWitt, lam_exp: i64) -> Option<Rate> {
    // E_p(a, pi^lam, T): coefficient of T^(m p^level) has valuation at least
    // m * min(v(a_level), p^level lam): per-degree rate min over levels.
    let mut rate: Option<Rate> = None;
    let mut pl = 1i64;
    for (level, comp) in a.coeffs().iter().enumerate() {
        if level > 0 {
            pl *= ctx.p as i64;
        }
        if comp.is_visibly_zero() {
            continue;
        }
        let v = match ctx.valuation(comp) {
            crate::okring::Valuation::Exact(v) => v,
            crate::okring::Valuation::AtLeast(v) => v,
        };
        let r = Rate { num: v.min(pl * lam_exp), den: pl };
        rate = Some(rate.map_or(r, |x| x.min(r)));
    }
    rate
}

/// Compute the truncated exponentials D_1, ..., D_(r-1) and the reduction
/// basis of the Kummer ideal for the positive block of the frame, stopping
/// at the first level that fails integral divisibility.
fn hopf_levels(ctx: &OkContext, a: &SSMatrix, r: usize, extra_degree: usize) -> Result<HopfLevels> {
    assert!(r <= 3, "explicit Hopf levels are sized for n <= 3");
    let l = a.exponents();
    // Global valuation rate over all entries of the positive block.
    let mut rate = Rate { num: l[0].max(1), den: 1 }; // the diagonal contributes via Lambda
    for i in 0..r {
        for j in (i + 1)..r {
            if let Some(er) = entry_rate(ctx, a.entry(i, j), l[i]) {
                rate = rate.min(er);
            }
        }
    }

    let mut d_polys: Vec<MultiPoly> = Vec::new();
    let mut basis: Vec<MultiPoly> = Vec::new();
    let mut failed_level = None;

    // Full (untruncated up to cap) column series, needed for substitutions.
    let mut column_series: Vec<MultiPoly> = Vec::new(); // index j-2: series of column j

    for level in 1..=r {
        // Raw equation of this level.
        let prev_factor = match level {
            1 => MultiPoly::constant(ctx.one()),
            2 => {
                // 1 + pi^(l1) T1
                let mut f = MultiPoly::constant(ctx.one());
                f.insert_term(ctx, exps1(0), ctx.pi_pow(l[0]));
                f
            }
            _ => {
                // D_(level-2) + pi^(l_(level-1)) T_(level-1)
                let mut f = d_polys[level - 3].clone();
                f.insert_term(ctx, exps1(level - 2), ctx.pi_pow(l[level - 2]));
                f
            }
        };
        let cur_factor = if level == 1 {
            let mut f = MultiPoly::constant(ctx.one());
            f.insert_term(ctx, exps1(0), ctx.pi_pow(l[0]));
            f
        } else {
            // D_(level-1) + pi^(l_level) T_level, which needs the column
            // series of column `level` truncated mod pi^(l_level).
            let cap = rate.degree_cap(l[level - 1]) + extra_degree;
            let series = column_full_series(ctx, a, level, cap, rate, &mut column_series)?;
            let d = truncate_poly(ctx, &series, l[level - 1]);
            d_polys.push(d.clone());
            let mut f = d;
            f.insert_term(ctx, exps1(level - 1), ctx.pi_pow(l[level - 1]));
            f
        };
        if failed_level.is_some() {
            continue;
        }
        let raw = cur_factor.pow(ctx, ctx.p).sub(ctx, &prev_factor);
        let mut rem = raw;
        for (j, q) in basis.iter().enumerate() {
            rem = rem.reduce_by(ctx, q, j, ctx.p as u16);
        }
        if !rem.all_zero_mod(ctx, ctx.p as i64 * l[level - 1])? {
            failed_level = Some(level);
            continue;
        }
        basis.push(rem.div_pi(ctx, ctx.p as i64 * l[level - 1])?);
    }
    Ok(HopfLevels { d_polys, basis, failed_level })
}

fn exps1(var: usize) -> [u16; MAX_HOPF_VARS] {
    let mut e = [0u16; MAX_HOPF_VARS];
    e[var] = 1;
    e
}

/// The full multivariate exponential series of column `col` (1-based level;
/// column entries a_(1,col), ..., a_(col-1,col)) up to total degree cap.
/// Populates and reuses `column_series` (index col-2).
fn column_full_series(
    ctx: &OkContext,
    a: &SSMatrix,
    col: usize,
    cap: usize,
    rate: Rate,
    column_series: &mut Vec<MultiPoly>,
) -> Result<MultiPoly> {
    // column_series[k] caches the series for column k+2 at the cap it was
    // built with; rebuild when a larger cap is requested.
    if col >= 2 && column_series.len() >= col - 1 {
        return Ok(column_series[col - 2].clone());
    }
    let l = a.exponents();
    let mut product = MultiPoly::constant(ctx.one());
    for i in 0..(col - 1) {
        let entry = a.entry(i, col - 1);
        if vec_is_zero(entry) {
            continue;
        }
        let exp = deformed_exp_witt(ctx, entry, l[i], cap)?;
        // substitution variable: X_i = T_i / (series of column i), where
        // column 1 has series 1.
        let subst_inv = if i == 0 {
            MultiPoly::constant(ctx.one())
        } else {
            let prev = column_full_series(ctx, a, i + 1, cap, rate, column_series)?;
            invert_series_poly(ctx, &prev, cap)
        };
        // sum_m exp_m (T_i * inv)^m
        let xi = MultiPoly::variable(ctx, i).mul(ctx, &subst_inv);
        let mut xi_pow = MultiPoly::constant(ctx.one());
        let mut acc = MultiPoly::zero();
        for (m, c) in exp.coeffs.iter().enumerate() {
            if m > 0 {
                xi_pow = trim_degree(ctx, &xi_pow.mul(ctx, &xi), cap);
            }
            if !c.is_visibly_zero() {
                acc = acc.add(ctx, &xi_pow.scale(ctx, c));
            }
        }
        product = trim_degree(ctx, &product.mul(ctx, &acc), cap);
    }
    if col >= 2 {
        while column_series.len() < col - 1 {
            column_series.push(MultiPoly::constant(ctx.one()));
        }
        column_series[col - 2] = product.clone();
    }
    Ok(product)
}

fn trim_degree(ctx: &OkContext, p: &MultiPoly, cap: usize) -> MultiPoly {
    let mut out = MultiPoly::zero();
    for (e, c) in p.terms() {
        let deg: usize = e.iter().map(|&x| x as usize).sum();
        if deg <= cap {
            out.insert_term(ctx, *e, c.clone());
        }
    }
    out
}

/// Inverse of a multivariate series with constant term 1, up to total
/// degree cap.
fn invert_series_poly(ctx: &OkContext, p: &MultiPoly, cap: usize) -> MultiPoly {
    let one = MultiPoly::constant(ctx.one());
    let delta = p.sub(ctx, &one);
    let mut acc = one.clone();
    let mut pow = MultiPoly::constant(ctx.one());
    for _ in 0..cap {
        pow = trim_degree(ctx, &pow.mul(ctx, &delta).neg(ctx), cap);
        if pow.is_visibly_zero() {
            break;
        }
        acc = acc.add(ctx, &pow);
    }
    acc
}

fn truncate_poly(ctx: &OkContext, p: &MultiPoly, modulus: i64) -> MultiPoly {
    let mut out = MultiPoly::zero();
    for (e, c) in p.terms() {
        let r = ctx.reduce_mod(c, modulus);
        if !r.is_visibly_zero() {
            out.insert_term(ctx, *e, r);
        }
    }
    out
}

/// Emit the explicit Hopf algebra presentation of the Kummer model defined
/// by a frame: truncated exponentials plus the defining equations, with
/// inverse factors eliminated by cross-multiplication. Zero exponents
/// produce the multiplicative-factor form.
pub fn emit_hopf(ctx: &OkContext, a: &SSMatrix) -> Result<HopfPresentation> {
    emit_hopf_capped(ctx, a, 0)
}

/// As [`emit_hopf`], with extra margin added to the computed truncation
/// degree of every exponential.
pub fn emit_hopf_capped(ctx: &OkContext, a: &SSMatrix, extra_degree: usize) -> Result<HopfPresentation> {
    let n = a.size();
    let l = a.exponents();
    if l.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Invalid("type must be ordered decreasingly".into()));
    }
    if l.iter().any(|&x| x < 0) {
        return Err(Error::Invalid("exponents must be nonnegative".into()));
    }
    let r = l.iter().filter(|&&x| x > 0).count();
    if n > 3 && r > 3 {
        return Err(Error::OutOfScope("explicit presentations are sized for n <= 3".into()));
    }
    let mut equations = Vec::new();
    let mut d_polys = Vec::new();
    if r > 0 {
        let levels = hopf_levels(ctx, a, r, extra_degree)?;
        if let Some(level) = levels.failed_level {
            return Err(Error::Invalid(format!(
                "frame does not define a finite flat model (level {level} fails integrality)"
            )));
        }
        d_polys = levels.d_polys;
        equations = levels.basis;
    }
    if r < n {
        // One multiplicative-factor equation covering the zero levels:
        // T_(r+1)^(p^(n-r)) - (previous factor).
        let prev_factor = match r {
            0 => MultiPoly::constant(ctx.one()),
            1 => {
                let mut f = MultiPoly::constant(ctx.one());
                f.insert_term(ctx, exps1(0), ctx.pi_pow(l[0]));
                f
            }
            _ => {
                let mut f = d_polys[r - 2].clone();
                f.insert_term(ctx, exps1(r - 1), ctx.pi_pow(l[r - 1]));
                f
            }
        };
        let mut lead = MultiPoly::zero();
        let mut e = [0u16; MAX_HOPF_VARS];
        e[r] = (ctx.p as u16).pow((n - r) as u32);
        lead.insert_term(ctx, e, ctx.one());
        equations.push(lead.sub(ctx, &prev_factor));
    }
    Ok(HopfPresentation { positive_levels: r, d_polys, equations })
}

/// The brute-force finite-flatness oracle: at each positive level verify at
/// the polynomial level that the cross-multiplied Kummer numerator vanishes
/// modulo pi^(p l_level) and the ideal of the lower levels.
pub fn verify_integrality(ctx: &OkContext, a: &SSMatrix) -> Result<bool> {
    verify_integrality_capped(ctx, a, 0)
}

pub fn verify_integrality_capped(ctx: &OkContext, a: &SSMatrix, extra_degree: usize) -> Result<bool> {
    let l = a.exponents();
    if l.windows(2).any(|w| w[0] < w[1]) || l.iter().any(|&x| x < 0) {
        return Ok(false);
    }
    if (ctx.p as i64 - 1) * l.first().copied().unwrap_or(0) > ctx.e {
        return Ok(false);
    }
    let r = l.iter().filter(|&&x| x > 0).count();
    if r == 0 {
        return Ok(true);
    }
    // Entries of the positive block must be topologically nilpotent for the
    // exponential truncations to make sense; otherwise the frame is not in
    // the membership set and the model is not finite flat.
    for i in 0..r {
        for j in (i + 1)..r {
            for comp in a.entry(i, j).coeffs() {
                if let crate::okring::Valuation::Exact(0) = ctx.valuation(comp) {
                    return Ok(false);
                }
            }
        }
    }
    let levels = hopf_levels(ctx, a, r, extra_degree)?;
    Ok(levels.failed_level.is_none())
}
