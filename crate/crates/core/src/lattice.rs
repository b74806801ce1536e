//! Lattices of W_n(k)((u)): finitely generated sub-W_n[[u]]-modules spanning
//! after inverting u.
//!
//! A lattice is echelonized at construction into a Teichmüller basis
//! e_1, ..., e_n with digit i-1 of e_i equal to the monomial u^(l_i) and all
//! earlier digits zero; every element then has a unique expansion
//! [t_1] e_1 + ... + [t_n] e_n, and membership is t_i in k[[u]] for all i.
//! Series inverses arising in pivot normalization are truncated at the
//! working degree bound; all other arithmetic is exact.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fq::Fq;
use crate::gmatrix::{laurent_from_json, laurent_to_json, EisensteinDigits, GMatrix};
use crate::laurent::{invert, LaurentPoly};
use crate::ring::Ring;
use crate::series::PadicElem;
use crate::FqPoly;

#[derive(Clone, Debug)]
pub struct Lattice {
    n: usize,
    gens: Vec<PadicElem>,
    deg_bound: i64,
    echelon: Vec<PadicElem>,
    l: Vec<i64>,
}

impl Lattice {
    /// Echelonizes at construction; fails with NotALattice when the
    /// generators do not span.
    pub fn new(fq: &Fq, n: usize, gens: Vec<PadicElem>, deg_bound: i64) -> Result<Self> {
        for g in &gens {
            if g.len() != n {
                return Err(Error::Invalid("generator length mismatch".into()));
            }
        }
        let (echelon, l) = echelonize(fq, n, &gens, deg_bound)?;
        Ok(Lattice { n, gens, deg_bound, echelon, l })
    }

    /// The lattice generated by the components of [A] p*.
    pub fn from_matrix(fq: &Fq, a: &GMatrix, deg_bound: i64) -> Result<Self> {
        Lattice::new(fq, a.size(), a.padic_rows(fq), deg_bound)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PadicElem] {
        &self.gens
    }

    /// The cached echelon T-basis, leading digits u^(l_i).
    pub fn echelon_basis(&self) -> &[PadicElem] {
        &self.echelon
    }

    pub fn leading_exponents(&self) -> &[i64] {
        &self.l
    }

    pub fn deg_bound(&self) -> i64 {
        self.deg_bound
    }

    /// vol = u^(l_1 + ... + l_n), returned as the exponent.
    pub fn volume_exponent(&self) -> i64 {
        self.l.iter().sum()
    }

    pub fn volume(&self, fq: &Fq) -> FqPoly {
        LaurentPoly::monomial(fq, self.volume_exponent(), fq.one())
    }

    /// Unique expansion coefficients of x over the echelon basis: x equals
    /// sum [t_i] e_i with t_i in k((u)).
    pub fn t_coordinates(&self, fq: &Fq, x: &PadicElem) -> Vec<FqPoly> {
        assert_eq!(x.len(), self.n);
        let mut r = x.clone();
        let mut coords = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let t = r.digit(i).mul_monomial(-self.l[i]);
            if !t.is_zero() {
                r = r.sub(fq, &self.echelon[i].teich_mul(fq, &t));
            }
            coords.push(t);
        }
        debug_assert!(r.is_zero(), "expansion must consume the element");
        coords
    }

    /// Membership: every expansion coefficient lies in k[[u]].
    pub fn contains(&self, fq: &Fq, x: &PadicElem) -> bool {
        self.t_coordinates(fq, x)
            .iter()
            .all(|t| t.val().map_or(true, |v| v >= 0))
    }

    /// other is a sublattice of self.
    pub fn includes(&self, fq: &Fq, other: &Lattice) -> bool {
        other.echelon.iter().all(|g| self.contains(fq, g))
    }

    pub fn lattice_eq(&self, fq: &Fq, other: &Lattice) -> bool {
        self.includes(fq, other) && other.includes(fq, self)
    }

    /// ker(p^(n+1-i)) as a lattice of W_(n+1-i)((u)), 1 <= i <= n+1.
    pub fn kernel_i(&self, fq: &Fq, i: usize) -> Result<Lattice> {
        assert!(1 <= i && i <= self.n + 1);
        let k = i - 1;
        let m = self.n + 1 - i;
        let gens: Vec<PadicElem> = self.echelon[k..]
            .iter()
            .map(|e| PadicElem::from_digits(e.digits()[k..].to_vec()))
            .collect();
        Lattice::new(fq, m, gens, self.deg_bound)
    }

    /// im(p^(i-1)) as a lattice of W_(n+1-i)((u)).
    pub fn image_i(&self, fq: &Fq, i: usize) -> Result<Lattice> {
        assert!(1 <= i && i <= self.n + 1);
        let m = self.n + 1 - i;
        let gens: Vec<PadicElem> = self.echelon[..m]
            .iter()
            .map(|e| PadicElem::from_digits(e.digits()[..m].to_vec()))
            .collect();
        Lattice::new(fq, m, gens, self.deg_bound)
    }

    /// The lattice generated by the Frobenius of the generators.
    pub fn frobenius_lattice(&self, fq: &Fq) -> Result<Lattice> {
        let gens: Vec<PadicElem> = self.echelon.iter().map(|g| g.frobenius(fq)).collect();
        Lattice::new(fq, self.n, gens, self.deg_bound)
    }

    /// E(u) . self, multiplying generators by the digit expansion of E.
    pub fn scaled_by(&self, fq: &Fq, eis: &EisensteinDigits) -> Result<Lattice> {
        let e_padic = PadicElem::from_digits((0..self.n).map(|i| eis.digit(i)).collect());
        let gens: Vec<PadicElem> = self.echelon.iter().map(|g| g.mul(fq, &e_padic)).collect();
        Lattice::new(fq, self.n, gens, self.deg_bound)
    }

    /// Brute-force test of E(u) M <= <phi(M)> <= M.
    pub fn is_mu_lattice(&self, fq: &Fq, eis: &EisensteinDigits) -> Result<bool> {
        let phi = self.frobenius_lattice(fq)?;
        if !self.includes(fq, &phi) {
            return Ok(false);
        }
        let scaled = self.scaled_by(fq, eis)?;
        Ok(phi.includes(fq, &scaled))
    }

    /// The unique distinguished matrix: echelon basis reduced so that
    /// deg a_ij < l_j.
    pub fn distinguished_matrix(&self, fq: &Fq) -> GMatrix {
        let mut basis = self.echelon.clone();
        for i in (0..self.n).rev() {
            for j in (i + 1)..self.n {
                let d = basis[i].digit(j).clone();
                let excess = d.high_part_shifted(fq, self.l[j]);
                if !excess.is_zero() {
                    let corr = basis[j].teich_mul(fq, &excess);
                    basis[i] = basis[i].sub(fq, &corr);
                }
            }
        }
        let mut g = GMatrix::diagonal(self.l.clone());
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                g.set_entry(i, j, basis[i].digit(j).clone());
            }
        }
        g
    }

    pub fn to_json(&self, fq: &Fq) -> Value {
        let gens: Vec<Value> = self
            .gens
            .iter()
            .map(|g| Value::Array(g.digits().iter().map(|d| laurent_to_json(fq, d)).collect()))
            .collect();
        json!({ "n": self.n, "gens": gens })
    }

    pub fn from_json(fq: &Fq, v: &Value, deg_bound: i64) -> Result<Lattice> {
        let n = v["n"].as_u64().ok_or_else(|| Error::Invalid("missing n".into()))? as usize;
        let gens = v["gens"]
            .as_array()
            .ok_or_else(|| Error::Invalid("missing gens".into()))?
            .iter()
            .map(|g| {
                let digits = g
                    .as_array()
                    .ok_or_else(|| Error::Invalid("generator must be a digit list".into()))?
                    .iter()
                    .map(|d| laurent_from_json(fq, d))
                    .collect::<Result<Vec<_>>>()?;
                if digits.len() != n {
                    return Err(Error::Invalid("generator has wrong digit count".into()));
                }
                Ok(PadicElem::from_digits(digits))
            })
            .collect::<Result<Vec<_>>>()?;
        Lattice::new(fq, n, gens, deg_bound)
    }
}

/// Level-by-level echelonization. Maintains a working list whose members all
/// vanish in digits below the current level; at each level the element whose
/// current digit has minimal u-valuation (ties to the earliest listed, with
/// carried p-multiples appended last) becomes the pivot, is normalized to a
/// monomial leading digit, and reduces the rest.
fn echelonize(fq: &Fq, n: usize, gens: &[PadicElem], deg_bound: i64) -> Result<(Vec<PadicElem>, Vec<i64>)> {
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut work: Vec<PadicElem> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let mut basis = Vec::with_capacity(n);
    let mut exps = Vec::with_capacity(n);
    for level in 0..n {
        let pivot_pos = {
            let mut best: Option<(i64, usize)> = None;
            for (idx, g) in work.iter().enumerate() {
                if let Some(v) = g.digit(level).val() {
                    if best.map_or(true, |(bv, _)| v < bv) {
                        best = Some((v, idx));
                    }
                }
            }
            match best {
                Some((_, idx)) => idx,
                None => return Err(Error::NotALattice { rank: level, n }),
            }
        };
        let pivot = work.remove(pivot_pos);
        let lead = pivot.digit(level);
        let lv = lead.val().unwrap();
        let e = if lead.deg() == Some(lv) && lead.coeff(fq, lv) == fq.one() {
            pivot.clone()
        } else {
            // normalize the leading digit to u^lv
            let t = invert(fq, |c| fq.inv(*c), lead, deg_bound).mul_monomial(lv);
            pivot.teich_mul(fq, &t)
        };
        let mut next: Vec<PadicElem> = Vec::with_capacity(work.len() + 1);
        for g in work.into_iter() {
            let d = g.digit(level);
            let reduced = if d.is_zero() {
                g
            } else {
                let t = divide_series(fq, d, &e.digit(level), deg_bound);
                g.sub(fq, &e.teich_mul(fq, &t))
            };
            if !reduced.is_zero() {
                next.push(reduced);
            }
        }
        let pe = e.mul_p_pow(1);
        if !pe.is_zero() {
            next.push(pe);
        }
        basis.push(e);
        exps.push(lv);
        work = next;
    }
    Ok((basis, exps))
}

/// a / b in k((u)) where b is a monomial u^lv (the normalized pivot digit);
/// falls back to a truncated series division otherwise.
fn divide_series(fq: &Fq, a: &FqPoly, b: &FqPoly, deg_bound: i64) -> FqPoly {
    let bv = b.val().expect("division by zero series");
    if b.deg() == Some(bv) {
        let c = b.coeff(fq, bv);
        let scaled = if c == fq.one() { a.clone() } else { a.scale(fq, &fq.inv(c)) };
        scaled.mul_monomial(-bv)
    } else {
        a.mul(fq, &invert(fq, |c| fq.inv(*c), b, deg_bound))
    }
}
