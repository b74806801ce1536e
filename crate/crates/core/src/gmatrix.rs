//! The loop of upper triangular matrices with monomial diagonal u^(l_i) and
//! Laurent entries, under the product A*B = rho([A][B]).
//!
//! The product is a loop operation: both divisions exist and are unique, but
//! associativity fails for n >= 3. Divisions are solved by increasing
//! distance to the diagonal, using that the (i,j) entry of A*B is
//! u^(m_j) a_ij + u^(l_i) b_ij plus terms of strictly smaller distance.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fq::Fq;
use crate::laurent::LaurentPoly;
use crate::okring::int_teich_digits;
use crate::ring::Ring;
use crate::series::{rho, series_frobenius, teich_product_digits, CarryAccum, PadicElem};
use crate::FqPoly;

/// Element of the matrix loop: size n, diagonal exponents l, strict upper
/// entries (row-major, entry (i,j) for 0 <= i < j < n).
#[derive(Clone, PartialEq, Debug)]
pub struct GMatrix {
    n: usize,
    l: Vec<i64>,
    a: Vec<FqPoly>,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // sum over rows r < i of (n - r - 1) slots
    let before = i * (2 * n - i - 1) / 2;
    before + (j - i - 1)
}

impl GMatrix {
    pub fn new(n: usize, l: Vec<i64>, a: Vec<FqPoly>) -> Self {
        assert_eq!(l.len(), n);
        assert_eq!(a.len(), n * (n - 1) / 2);
        GMatrix { n, l, a }
    }

    pub fn identity(n: usize) -> Self {
        GMatrix::diagonal(vec![0; n])
    }

    pub fn diagonal(l: Vec<i64>) -> Self {
        let n = l.len();
        GMatrix { n, l, a: vec![LaurentPoly::zero(); n * (n - 1) / 2] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn diag_exponents(&self) -> &[i64] {
        &self.l
    }

    pub fn entry(&self, i: usize, j: usize) -> &FqPoly {
        &self.a[upper_index(self.n, i, j)]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: FqPoly) {
        self.a[upper_index(self.n, i, j)] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &FqPoly)> {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.entry(i, j))))
    }

    /// Materialize as a full square matrix of Laurent entries.
    pub fn to_full(&self, fq: &Fq) -> Vec<Vec<FqPoly>> {
        let mut m = vec![vec![LaurentPoly::zero(); self.n]; self.n];
        for i in 0..self.n {
            m[i][i] = LaurentPoly::monomial(fq, self.l[i], fq.one());
            for j in (i + 1)..self.n {
                m[i][j] = self.entry(i, j).clone();
            }
        }
        m
    }

    /// Rebuild from a full matrix; the diagonal must be monomial and the
    /// lower part zero.
    pub fn from_full(fq: &Fq, m: &[Vec<FqPoly>]) -> Result<Self> {
        let n = m.len();
        let mut l = Vec::with_capacity(n);
        let mut a = Vec::new();
        for (i, row) in m.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if j < i && !entry.is_zero() {
                    return Err(Error::Invalid(format!(
                        "nonzero entry below diagonal at ({i},{j})"
                    )));
                }
                if j == i {
                    let d = entry
                        .val()
                        .filter(|_| entry.deg() == entry.val())
                        .filter(|&v| entry.coeff(fq, v) == fq.one())
                        .ok_or_else(|| {
                            Error::Invalid(format!("diagonal entry ({i},{i}) is not a monomial"))
                        })?;
                    l.push(d);
                }
                if j > i {
                    a.push(entry.clone());
                }
            }
        }
        Ok(GMatrix { n, l, a })
    }

    /// Rows of [A] p*: row i as the digit-form element sum_j [A_ij] p^j.
    pub fn padic_rows(&self, fq: &Fq) -> Vec<PadicElem> {
        self.to_full(fq)
            .iter()
            .map(|row| {
                let mut acc = CarryAccum::new(self.n);
                for (j, e) in row.iter().enumerate() {
                    acc.push(j, e.clone());
                }
                acc.collapse(fq)
            })
            .collect()
    }

    pub fn is_positive(&self) -> bool {
        self.l.iter().all(|&li| li >= 0)
            && self.a.iter().all(|e| match e.val() {
                Some(v) => v >= 0,
                None => e.precision().map_or(true, |p| p >= 0),
            })
    }

    pub fn is_unitriangular(&self) -> bool {
        self.l.iter().all(|&li| li == 0)
    }

    /// All entries polynomial with deg a_ij < l_j.
    pub fn degree_bounds_hold(&self) -> bool {
        self.entries().all(|(_, j, e)| match (e.val(), e.deg()) {
            (Some(v), Some(d)) => v >= 0 && d < self.l[j],
            _ => true,
        })
    }

    pub fn to_json(&self, fq: &Fq) -> Value {
        let mut entries = serde_json::Map::new();
        for (i, j, e) in self.entries() {
            if !e.is_zero() {
                entries.insert(format!("{},{}", i + 1, j + 1), laurent_to_json(fq, e));
            }
        }
        json!({ "n": self.n, "l": self.l, "a": Value::Object(entries) })
    }

    pub fn from_json(fq: &Fq, v: &Value) -> Result<Self> {
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
        let mut g = GMatrix::diagonal(l);
        if let Some(map) = v["a"].as_object() {
            for (key, pv) in map {
                let parts: Vec<&str> = key.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::Invalid(format!("bad entry key {key}")));
                }
                let i: usize = parts[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Invalid("bad index".into()))?;
                let j: usize = parts[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Invalid("bad index".into()))?;
                if !(1 <= i && i < j && j <= n) {
                    return Err(Error::Invalid(format!("entry ({i},{j}) not strictly upper")));
                }
                g.set_entry(i - 1, j - 1, laurent_from_json(fq, pv)?);
            }
        }
        Ok(g)
    }
}

/// Serialize as {min_degree, coeffs: [packed field elements]}.
pub fn laurent_to_json(fq: &Fq, p: &FqPoly) -> Value {
    match (p.val(), p.deg()) {
        (Some(min), Some(d)) => {
            let coeffs: Vec<u64> = (min..=d).map(|deg| p.coeff(fq, deg).0).collect();
            json!({ "min_degree": min, "coeffs": coeffs })
        }
        _ => json!({ "min_degree": 0, "coeffs": [] }),
    }
}

pub fn laurent_from_json(fq: &Fq, v: &Value) -> Result<FqPoly> {
    let min = v["min_degree"].as_i64().unwrap_or(0);
    let coeffs = v["coeffs"]
        .as_array()
        .ok_or_else(|| Error::Invalid("missing coeffs".into()))?
        .iter()
        .map(|x| {
            let c = x.as_u64().ok_or_else(|| Error::Invalid("bad coefficient".into()))?;
            if c >= fq.q() {
                return Err(Error::Invalid(format!(
                    "coefficient {c} out of range for q={}",
                    fq.q()
                )));
            }
            Ok(crate::fq::FqElem(c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LaurentPoly::from_coeffs(fq, min, coeffs))
}

/// Product of general square matrices in Teichmüller coordinates:
/// rho([X][Y]) entrywise.
pub fn star_full(fq: &Fq, x: &[Vec<FqPoly>], y: &[Vec<FqPoly>]) -> Vec<Vec<FqPoly>> {
    let n = x.len();
    let mut rows: Vec<Vec<PadicElem>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            // Digit expansion of sum_k [x_ik][y_kj] in W_n((u)).
            let mut acc = CarryAccum::new(n);
            for (k, xe) in x[i].iter().enumerate() {
                let ye = &y[k][j];
                if xe.is_zero() || ye.is_zero() {
                    continue;
                }
                for (t, d) in teich_product_digits(fq, &[xe.clone(), ye.clone()], n)
                    .into_iter()
                    .enumerate()
                {
                    acc.push(t, d);
                }
            }
            row.push(acc.collapse(fq));
        }
        rows.push(row);
    }
    rho(fq, &rows)
}

/// The loop product A * B.
pub fn star(fq: &Fq, a: &GMatrix, b: &GMatrix) -> GMatrix {
    assert_eq!(a.n, b.n);
    let full = star_full(fq, &a.to_full(fq), &b.to_full(fq));
    GMatrix::from_full(fq, &full).expect("loop product preserves shape")
}

/// Left division: the unique B with A * B = C.
pub fn ldiv(fq: &Fq, a: &GMatrix, c: &GMatrix) -> GMatrix {
    assert_eq!(a.n, c.n);
    let n = a.n;
    let m: Vec<i64> = c.l.iter().zip(&a.l).map(|(nc, la)| nc - la).collect();
    let mut b = GMatrix::diagonal(m);
    for dist in 1..n {
        let p = star(fq, a, &b);
        for i in 0..(n - dist) {
            let j = i + dist;
            let delta = c.entry(i, j).sub(fq, p.entry(i, j));
            b.set_entry(i, j, delta.mul_monomial(-a.l[i]));
        }
    }
    b
}

/// Right division: the unique A with A * B = C.
pub fn rdiv(fq: &Fq, c: &GMatrix, b: &GMatrix) -> GMatrix {
    assert_eq!(c.n, b.n);
    let n = c.n;
    let l: Vec<i64> = c.l.iter().zip(&b.l).map(|(nc, mb)| nc - mb).collect();
    let mut a = GMatrix::diagonal(l);
    for dist in 1..n {
        let p = star(fq, &a, b);
        for i in 0..(n - dist) {
            let j = i + dist;
            let delta = c.entry(i, j).sub(fq, p.entry(i, j));
            a.set_entry(i, j, delta.mul_monomial(-b.l[j]));
        }
    }
    a
}

/// Delete the last row and column.
pub fn upper(a: &GMatrix) -> Result<GMatrix> {
    shrink(a, 0)
}

/// Delete the first row and column.
pub fn lower(a: &GMatrix) -> Result<GMatrix> {
    shrink(a, 1)
}

fn shrink(a: &GMatrix, offset: usize) -> Result<GMatrix> {
    if a.n <= 1 {
        return Err(Error::Invalid("cannot shrink a 1x1 matrix".into()));
    }
    let n = a.n - 1;
    let l: Vec<i64> = (0..n).map(|i| a.l[i + offset]).collect();
    let mut g = GMatrix::diagonal(l);
    for i in 0..n {
        for j in (i + 1)..n {
            g.set_entry(i, j, a.entry(i + offset, j + offset).clone());
        }
    }
    Ok(g)
}

/// Entrywise Frobenius: coefficients^p, u -> u^p; diagonal becomes u^(p l_i).
pub fn phi_mat(fq: &Fq, a: &GMatrix) -> GMatrix {
    let l: Vec<i64> = a.l.iter().map(|&x| x * fq.p as i64).collect();
    let mut g = GMatrix::diagonal(l);
    for (i, j, e) in a.entries() {
        g.set_entry(i, j, series_frobenius(fq, e));
    }
    g
}

/// p-adic digits of a monic integer polynomial u^e + c_(e-1) u^(e-1) + ... + c_0,
/// held as Laurent digit polynomials over F_q: digit i is
/// sum_j (i-th Teichmüller digit of c_j) u^j, plus u^e in digit 0.
#[derive(Clone, Debug, PartialEq)]
pub struct EisensteinDigits {
    pub e: i64,
    digits: Vec<FqPoly>,
}

impl EisensteinDigits {
    /// From the lower integer coefficients; validates the Eisenstein shape
    /// (all c_j divisible by p, constant term of p-valuation exactly 1).
    pub fn from_integer_coeffs(fq: &Fq, e: i64, coeffs: &[i64], ndigits: usize) -> Result<Self> {
        let p = fq.p as i64;
        if coeffs.len() != e as usize {
            return Err(Error::Invalid("need exactly e lower coefficients".into()));
        }
        for (j, &c) in coeffs.iter().enumerate() {
            if c % p != 0 {
                return Err(Error::Invalid(format!("coefficient of u^{j} not divisible by p")));
            }
        }
        if coeffs.is_empty() || (coeffs[0] / p) % p == 0 {
            return Err(Error::Invalid("constant term must have p-valuation exactly 1".into()));
        }
        let mut digits = Vec::with_capacity(ndigits);
        for i in 0..ndigits {
            let mut poly = if i == 0 {
                LaurentPoly::monomial(fq, e, fq.one())
            } else {
                LaurentPoly::zero()
            };
            for (j, &c) in coeffs.iter().enumerate() {
                let ds = int_teich_digits(fq.p, c, ndigits);
                if ds[i] != 0 {
                    poly = poly.add(fq, &LaurentPoly::monomial(fq, j as i64, fq.from_u64(ds[i])));
                }
            }
            digits.push(poly);
        }
        Ok(EisensteinDigits { e, digits })
    }

    /// An arbitrary digit family; the diamond action is defined for any
    /// polynomial, Eisenstein or not.
    pub fn from_digits(e: i64, digits: Vec<FqPoly>) -> Self {
        EisensteinDigits { e, digits }
    }

    pub fn digit(&self, i: usize) -> FqPoly {
        self.digits.get(i).cloned().unwrap_or_else(LaurentPoly::zero)
    }

    pub fn ndigits(&self) -> usize {
        self.digits.len()
    }

    pub fn truncated(&self, ndigits: usize) -> Self {
        let mut d = self.digits.clone();
        d.truncate(ndigits);
        EisensteinDigits { e: self.e, digits: d }
    }
}

/// The action of the polynomial E(u) on a matrix:
/// rho(sum_i [E_i Id * P^i U^i A]) where P^i shifts the leading block of A
/// into the upper right corner.
pub fn ediamond(fq: &Fq, eis: &EisensteinDigits, a: &GMatrix) -> GMatrix {
    let n = a.n;
    let full = a.to_full(fq);
    let mut rows: Vec<CarryAccum> = (0..n).map(|_| CarryAccum::new(n)).collect();
    for i in 0..n {
        let ei = eis.digit(i);
        if ei.is_zero() {
            continue;
        }
        let mut shifted = vec![vec![LaurentPoly::zero(); n]; n];
        for r in 0..(n - i) {
            for c in 0..(n - i) {
                shifted[r][c + i] = full[r][c].clone();
            }
        }
        let ei_id: Vec<Vec<FqPoly>> = (0..n)
            .map(|r| {
                let mut row = vec![LaurentPoly::zero(); n];
                row[r] = ei.clone();
                row
            })
            .collect();
        let prod = star_full(fq, &ei_id, &shifted);
        for (r, row) in prod.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                rows[r].push(j, e);
            }
        }
    }
    let digit_rows: Vec<Vec<FqPoly>> = rows
        .into_iter()
        .map(|acc| acc.collapse(fq).digits().to_vec())
        .collect();
    GMatrix::from_full(fq, &digit_rows).expect("diamond action preserves shape")
}

/// The order A > B iff A/B >= 0.
pub fn succ(fq: &Fq, a: &GMatrix, b: &GMatrix) -> bool {
    rdiv(fq, a, b).is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::s_fun;

    fn fp3() -> Fq {
        Fq::prime_field(3)
    }

    fn poly(f: &Fq, min: i64, cs: &[i64]) -> FqPoly {
        LaurentPoly::from_coeffs(f, min, cs.iter().map(|&c| f.elem_from_i64(c)).collect())
    }

    fn sample3(f: &Fq, l: [i64; 3], a12: &FqPoly, a13: &FqPoly, a23: &FqPoly) -> GMatrix {
        let _ = f;
        let mut g = GMatrix::diagonal(l.to_vec());
        g.set_entry(0, 1, a12.clone());
        g.set_entry(0, 2, a13.clone());
        g.set_entry(1, 2, a23.clone());
        g
    }

    #[test]
    fn identity_is_neutral() {
        let f = fp3();
        let a = sample3(&f, [2, 1, 0], &poly(&f, 0, &[1]), &poly(&f, 0, &[2, 1]), &poly(&f, 1, &[1]));
        let id = GMatrix::identity(3);
        assert_eq!(star(&f, &id, &a), a);
        assert_eq!(star(&f, &a, &id), a);
    }

    #[test]
    fn n2_star_is_matrix_product() {
        let f = fp3();
        let mut a = GMatrix::diagonal(vec![1, 2]);
        a.set_entry(0, 1, poly(&f, 0, &[2, 1]));
        let mut b = GMatrix::diagonal(vec![0, 1]);
        b.set_entry(0, 1, poly(&f, 0, &[1, 1]));
        let c = star(&f, &a, &b);
        // (1,2) entry: u^(l_1) b_12 + u^(m_2) a_12
        let expected = poly(&f, 0, &[1, 1])
            .mul_monomial(1)
            .add(&f, &poly(&f, 0, &[2, 1]).mul_monomial(1));
        assert_eq!(c.diag_exponents(), &[1, 3]);
        assert_eq!(*c.entry(0, 1), expected);
    }

    #[test]
    fn n3_entry_13_closed_form() {
        let f = fp3();
        let (l, m) = ([2i64, 1, 1], [1i64, 2, 0]);
        let a12 = poly(&f, 0, &[1, 2]);
        let a13 = poly(&f, 0, &[2]);
        let a23 = poly(&f, 0, &[1, 1]);
        let b12 = poly(&f, 0, &[2, 2]);
        let b13 = poly(&f, 1, &[1]);
        let b23 = poly(&f, 0, &[2]);
        let a = sample3(&f, l, &a12, &a13, &a23);
        let b = sample3(&f, m, &b12, &b13, &b23);
        let prod = star(&f, &a, &b);
        // u^(l1) b13 + a12 b23 + u^(m3) a13 + S_1(u^(l1) b12, u^(m2) a12)
        let t1 = b13.mul_monomial(l[0]);
        let t2 = a12.mul(&f, &b23);
        let t3 = a13.mul_monomial(m[2]);
        let t4 = s_fun(&f, 1, &[b12.mul_monomial(l[0]), a12.mul_monomial(m[1])]);
        let expected = t1.add(&f, &t2).add(&f, &t3).add(&f, &t4);
        assert_eq!(*prod.entry(0, 2), expected);
    }

    #[test]
    fn n4_product_closed_forms() {
        // The full size-4 product: entries at distance 1 are linear, at
        // distance 2 they pick up one S_1 carry, and the corner entry picks
        // up S_2, a nested S_1 of four terms, and the P_1 carry of a
        // Teichmüller product.
        let f = fp3();
        let mut s = crate::sampling::Sampler::new(17);
        for _ in 0..10 {
            let a = s.gmatrix(&f, 4, (-1, 2), 3);
            let b = s.gmatrix(&f, 4, (-1, 2), 3);
            let prod = star(&f, &a, &b);
            let l = a.diag_exponents();
            let m = b.diag_exponents();
            let (a12, a13, a14) = (a.entry(0, 1), a.entry(0, 2), a.entry(0, 3));
            let (a23, a24) = (a.entry(1, 2), a.entry(1, 3));
            let a34 = a.entry(2, 3);
            let (b12, b13, b14) = (b.entry(0, 1), b.entry(0, 2), b.entry(0, 3));
            let (b23, b24) = (b.entry(1, 2), b.entry(1, 3));
            let b34 = b.entry(2, 3);
            for (i, (ai, bi)) in [(0usize, (a12, b12)), (1, (a23, b23)), (2, (a34, b34))] {
                let expect = bi.mul_monomial(l[i]).add(&f, &ai.mul_monomial(m[i + 1]));
                assert_eq!(prod.entry(i, i + 1), &expect);
            }
            let p13 = b13
                .mul_monomial(l[0])
                .add(&f, &a12.mul(&f, b23))
                .add(&f, &a13.mul_monomial(m[2]))
                .add(&f, &s_fun(&f, 1, &[b12.mul_monomial(l[0]), a12.mul_monomial(m[1])]));
            assert_eq!(prod.entry(0, 2), &p13);
            let p24 = b24
                .mul_monomial(l[1])
                .add(&f, &a23.mul(&f, b34))
                .add(&f, &a24.mul_monomial(m[3]))
                .add(&f, &s_fun(&f, 1, &[b23.mul_monomial(l[1]), a23.mul_monomial(m[2])]));
            assert_eq!(prod.entry(1, 3), &p24);
            let inner = s_fun(&f, 1, &[b12.mul_monomial(l[0]), a12.mul_monomial(m[1])]);
            let p14 = b14
                .mul_monomial(l[0])
                .add(&f, &a12.mul(&f, b24))
                .add(&f, &a13.mul(&f, b34))
                .add(&f, &a14.mul_monomial(m[3]))
                .add(&f, &crate::series::s_fun(&f, 2, &[b12.mul_monomial(l[0]), a12.mul_monomial(m[1])]))
                .add(
                    &f,
                    &s_fun(
                        &f,
                        1,
                        &[
                            b13.mul_monomial(l[0]),
                            a12.mul(&f, b23),
                            a13.mul_monomial(m[2]),
                            inner,
                        ],
                    ),
                )
                .add(&f, &crate::series::p_fun(&f, 1, &[a12.clone(), b23.clone()]));
            assert_eq!(prod.entry(0, 3), &p14);
        }
    }

    #[test]
    fn division_round_trips() {
        let f = fp3();
        let a = sample3(&f, [2, 1, 0], &poly(&f, 0, &[1, 1]), &poly(&f, -1, &[2]), &poly(&f, 0, &[2, 1]));
        let b = sample3(&f, [1, 1, 2], &poly(&f, 0, &[2]), &poly(&f, 1, &[1, 1]), &poly(&f, 0, &[1]));
        let c = star(&f, &a, &b);
        assert_eq!(ldiv(&f, &a, &c), b);
        assert_eq!(rdiv(&f, &c, &b), a);
        assert_eq!(ldiv(&f, &a, &a), GMatrix::identity(3));
        assert_eq!(rdiv(&f, &a, &a), GMatrix::identity(3));
    }

    #[test]
    fn upper_lower_are_homomorphisms() {
        let f = fp3();
        let a = sample3(&f, [1, 1, 0], &poly(&f, 0, &[1]), &poly(&f, 0, &[1, 1]), &poly(&f, 0, &[2]));
        let b = sample3(&f, [0, 2, 1], &poly(&f, 1, &[2]), &poly(&f, 0, &[2, 2]), &poly(&f, 0, &[1, 2]));
        let ab = star(&f, &a, &b);
        assert_eq!(upper(&ab).unwrap(), star(&f, &upper(&a).unwrap(), &upper(&b).unwrap()));
        assert_eq!(lower(&ab).unwrap(), star(&f, &lower(&a).unwrap(), &lower(&b).unwrap()));
        assert_eq!(
            upper(&lower(&a).unwrap()).unwrap(),
            lower(&upper(&a).unwrap()).unwrap()
        );
    }

    #[test]
    fn nonassociativity_closed_form_n3() {
        let f = fp3();
        let a = sample3(&f, [1, 2, 0], &poly(&f, 0, &[1, 1]), &poly(&f, 0, &[2]), &poly(&f, 1, &[2]));
        let b = sample3(&f, [2, 1, 1], &poly(&f, 0, &[2, 1]), &poly(&f, 0, &[1]), &poly(&f, 0, &[1, 2]));
        let c = sample3(&f, [0, 1, 2], &poly(&f, 0, &[1]), &poly(&f, 1, &[2]), &poly(&f, 0, &[2, 2]));
        let left = star(&f, &star(&f, &a, &b), &c);
        let right = star(&f, &a, &star(&f, &b, &c));
        let diff = left.entry(0, 2).sub(&f, right.entry(0, 2));
        // (u^(n3) - u^(n2)) S_1(u^(l1) b12, u^(m2) a12)
        let n2 = c.diag_exponents()[1];
        let n3 = c.diag_exponents()[2];
        let factor = poly(&f, n3, &[1]).sub(&f, &poly(&f, n2, &[1]));
        let s = s_fun(
            &f,
            1,
            &[
                b.entry(0, 1).mul_monomial(a.diag_exponents()[0]),
                a.entry(0, 1).mul_monomial(b.diag_exponents()[1]),
            ],
        );
        assert_eq!(diff, factor.mul(&f, &s));
        assert_eq!(left.entry(0, 1), right.entry(0, 1));
        assert_eq!(left.entry(1, 2), right.entry(1, 2));
    }

    #[test]
    fn ediamond_single_digit_is_scaling() {
        let f = fp3();
        let a = sample3(&f, [1, 0, 0], &poly(&f, 0, &[1]), &poly(&f, 0, &[2]), &poly(&f, 0, &[1, 1]));
        let e = EisensteinDigits::from_digits(2, vec![poly(&f, 2, &[1])]);
        let d = ediamond(&f, &e, &a);
        assert_eq!(d.diag_exponents(), &[3, 2, 2]);
        assert_eq!(*d.entry(0, 1), a.entry(0, 1).mul_monomial(2));
        assert_eq!(*d.entry(0, 2), a.entry(0, 2).mul_monomial(2));
        assert_eq!(*d.entry(1, 2), a.entry(1, 2).mul_monomial(2));
    }

    #[test]
    fn ediamond_n3_closed_form() {
        let f = fp3();
        // E = u^2 - 3: E_0 = u^2 and E_1 = 2 since -3 = [0] + [2] 3 in Z_3.
        let eis = EisensteinDigits::from_integer_coeffs(&f, 2, &[-3, 0], 3).unwrap();
        assert_eq!(eis.digit(0), poly(&f, 2, &[1]));
        assert_eq!(eis.digit(1), poly(&f, 0, &[2]));
        let a = sample3(&f, [1, 1, 0], &poly(&f, 0, &[2]), &poly(&f, 0, &[1]), &poly(&f, 0, &[1]));
        let d = ediamond(&f, &eis, &a);
        let e = 2i64;
        let e1 = eis.digit(1);
        let e2 = eis.digit(2);
        let expect12 = a.entry(0, 1).mul_monomial(e).add(&f, &e1.mul_monomial(1));
        assert_eq!(*d.entry(0, 1), expect12);
        let expect23 = a.entry(1, 2).mul_monomial(e).add(&f, &e1.mul_monomial(1));
        assert_eq!(*d.entry(1, 2), expect23);
        let expect13 = a
            .entry(0, 2)
            .mul_monomial(e)
            .add(&f, &a.entry(0, 1).mul(&f, &e1))
            .add(&f, &s_fun(&f, 1, &[a.entry(0, 1).mul_monomial(e), e1.mul_monomial(1)]))
            .add(&f, &e2.mul_monomial(1));
        assert_eq!(*d.entry(0, 2), expect13);
    }

    #[test]
    fn diamond_and_phi_commute_with_shrinking() {
        let f = fp3();
        let eis = EisensteinDigits::from_integer_coeffs(&f, 2, &[-3, 0], 3).unwrap();
        let a = sample3(&f, [1, 1, 1], &poly(&f, 0, &[1, 2]), &poly(&f, 0, &[2]), &poly(&f, 0, &[1]));
        let ua = upper(&a).unwrap();
        let la = lower(&a).unwrap();
        assert_eq!(upper(&phi_mat(&f, &a)).unwrap(), phi_mat(&f, &ua));
        assert_eq!(lower(&phi_mat(&f, &a)).unwrap(), phi_mat(&f, &la));
        let e2 = eis.truncated(2);
        assert_eq!(upper(&ediamond(&f, &eis, &a)).unwrap(), ediamond(&f, &e2, &ua));
        assert_eq!(lower(&ediamond(&f, &eis, &a)).unwrap(), ediamond(&f, &e2, &la));
    }

    #[test]
    fn positivity_and_order() {
        let f = fp3();
        let id = GMatrix::identity(2);
        assert!(id.is_positive());
        let mut neg = GMatrix::diagonal(vec![1, 0]);
        neg.set_entry(0, 1, poly(&f, -1, &[1]));
        assert!(!neg.is_positive());
        let a = GMatrix::diagonal(vec![2, 1]);
        assert!(succ(&f, &a, &a));
        assert!(succ(&f, &a, &GMatrix::identity(2)));
        assert!(!succ(&f, &GMatrix::identity(2), &a));
    }

    #[test]
    fn diag_exponent_map_is_homomorphism() {
        let f = fp3();
        let a = sample3(&f, [3, 1, 0], &poly(&f, 0, &[1]), &poly(&f, 0, &[2]), &poly(&f, 0, &[1]));
        let b = sample3(&f, [1, 2, 1], &poly(&f, 0, &[2]), &poly(&f, 0, &[1]), &poly(&f, 0, &[2]));
        let c = star(&f, &a, &b);
        let sums: Vec<i64> = a
            .diag_exponents()
            .iter()
            .zip(b.diag_exponents())
            .map(|(x, y)| x + y)
            .collect();
        assert_eq!(c.diag_exponents(), &sums[..]);
    }

    #[test]
    fn json_round_trip() {
        let f = fp3();
        let a = sample3(&f, [2, 1, 0], &poly(&f, 0, &[1, 2]), &poly(&f, -1, &[2]), &poly(&f, 0, &[1]));
        let j = a.to_json(&f);
        let back = GMatrix::from_json(&f, &j).unwrap();
        assert_eq!(a, back);
    }
}
