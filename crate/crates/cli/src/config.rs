//! Run configuration: the arithmetic parameters (p, q, e, E) plus precision
//! overrides, loaded from a JSON file. The environment variable
//! MUFORGE_PRECISION_SLACK adds digits to every default precision.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use muforge_core::classify;
use muforge_core::dictionary::DictContext;
use muforge_core::gmatrix::EisensteinDigits;
use muforge_core::kummer;
use muforge_core::okring::OkContext;
use muforge_core::Fq;

#[derive(Debug, Clone, Deserialize, Default)]
pub struct PrecisionOverrides {
    pub u_degree: Option<i64>,
    pub pi_precision: Option<i64>,
    pub witt_length: Option<usize>,
    pub exp_degree: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Config {
    pub p: u64,
    #[serde(default)]
    pub q: Option<u64>,
    pub e: i64,
    #[serde(rename = "E_coeffs")]
    pub e_coeffs: Vec<i64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub precision: PrecisionOverrides,
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn default_n() -> usize {
    2
}

pub fn precision_slack() -> i64 {
    std::env::var("MUFORGE_PRECISION_SLACK")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Config = serde_json::from_str(&text).context("parsing config JSON")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 {
            bail!("p must be an odd prime >= 3");
        }
        if !is_prime(self.p) {
            bail!("p = {} is not prime", self.p);
        }
        if let Some(q) = self.q {
            let mut m = 0u32;
            let mut x = 1u64;
            while x < q {
                x *= self.p;
                m += 1;
            }
            if x != q {
                bail!("q = {q} is not a power of p = {}", self.p);
            }
            let _ = m;
        }
        if self.e_coeffs.len() != self.e as usize {
            bail!("E_coeffs must list the {} lower coefficients of E(u)", self.e);
        }
        if self.n < 1 || self.n > 3 {
            bail!("congruence commands support n in 1..=3");
        }
        Ok(())
    }

    pub fn ext_degree(&self) -> usize {
        let q = self.q.unwrap_or(self.p);
        let mut m = 0usize;
        let mut x = 1u64;
        while x < q {
            x *= self.p;
            m += 1;
        }
        m.max(1)
    }

    pub fn fq(&self) -> Fq {
        Fq::new(self.p, self.ext_degree())
    }

    pub fn deg_bound(&self) -> i64 {
        self.precision
            .u_degree
            .unwrap_or_else(|| classify::default_deg_bound(self.p, self.e))
            + precision_slack()
    }

    pub fn witt_len(&self) -> usize {
        self.precision.witt_length.unwrap_or(kummer::DEFAULT_WITT_LEN)
            + precision_slack().max(0) as usize
    }

    pub fn eisenstein(&self, fq: &Fq) -> Result<EisensteinDigits> {
        self.eisenstein_for(fq, self.n.max(3))
    }

    pub fn eisenstein_for(&self, fq: &Fq, n: usize) -> Result<EisensteinDigits> {
        EisensteinDigits::from_integer_coeffs(fq, self.e, &self.e_coeffs, n + 1)
            .map_err(|e| anyhow::anyhow!("invalid Eisenstein polynomial: {e}"))
    }

    pub fn ok_context(&self) -> Result<OkContext> {
        let lmax = self.e / (self.p as i64 - 1);
        let base = self.p as i64 * 3 * lmax + self.e + 2;
        let n_prec = self.precision.pi_precision.unwrap_or(base) + precision_slack();
        OkContext::new(self.p, self.e, &self.e_coeffs, n_prec, self.witt_len() as u32 + 2)
            .map_err(|e| anyhow::anyhow!("invalid ramified context: {e}"))
    }

    pub fn dict_context(&self) -> Result<DictContext> {
        if self.q.unwrap_or(self.p) != self.p {
            bail!("the dictionary fixes q = p");
        }
        DictContext::new(self.p, self.e, &self.e_coeffs)
            .map_err(|e| anyhow::anyhow!("invalid dictionary context: {e}"))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
