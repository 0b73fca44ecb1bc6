use crate::error::{Error, Result};
use crate::seed::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn default_noise_sd() -> f64 {
    0.3
}

fn default_outcome_coupling() -> f64 {
    0.65
}

/// Planted-bias dataset description.
///
/// Rows draw a fair coin for the group `g`, standard normal informative and
/// noise features, and label `y = [sum_j 0.7^j x_j + coupling * bias * (2g - 1) + e > 0]`
/// with `e ~ N(0, noise_sd^2)`. Proxy `m` is `s_m g + (1 - s_m) z` with
/// `z ~ N(0, 1)` and `s_m` falling linearly from `bias` to `0.75 bias`, so
/// at full bias the first proxy equals the group column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub rows: usize,
    pub informative: usize,
    pub proxies: usize,
    #[serde(default)]
    pub noise: usize,
    pub bias: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    /// Scale of the group's direct effect on the label, relative to `bias`.
    #[serde(default = "default_outcome_coupling")]
    pub outcome_coupling: f64,
}

impl SynthSpec {
    pub fn new(rows: usize, informative: usize, proxies: usize, noise: usize, bias: f64, seed: u64) -> Self {
        Self {
            rows,
            informative,
            proxies,
            noise,
            bias,
            seed,
            noise_sd: default_noise_sd(),
            outcome_coupling: default_outcome_coupling(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.informative == 0 {
            return Err(Error::InvalidConfig("rows and informative must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.bias) {
            return Err(Error::InvalidConfig(format!("bias must lie in [0, 1], got {}", self.bias)));
        }
        if self.noise_sd.is_nan() || self.noise_sd < 0.0 || !self.outcome_coupling.is_finite() {
            return Err(Error::InvalidConfig("noise_sd and outcome_coupling must be finite, noise_sd >= 0".into()));
        }
        Ok(())
    }

    pub fn proxy_strength(&self, m: usize) -> f64 {
        let span = self.proxies.saturating_sub(1).max(1) as f64;
        self.bias * (1.0 - 0.25 * m as f64 / span)
    }
}

/// Ground-truth column roles written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRoles {
    pub target: String,
    pub protected: String,
    pub informative: Vec<String>,
    pub proxies: Vec<String>,
    pub proxy_strengths: Vec<f64>,
    pub noise: Vec<String>,
    pub spec: SynthSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub header: Vec<String>,
    /// Row-major, columns as in `header`; group and label are 0/1.
    pub rows: Vec<Vec<f64>>,
    pub roles: SynthRoles,
}

pub fn synthesize(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let informative: Vec<String> = (0..spec.informative).map(|j| format!("inf_{j}")).collect();
    let proxies: Vec<String> = (0..spec.proxies).map(|j| format!("proxy_{j}")).collect();
    let noise: Vec<String> = (0..spec.noise).map(|j| format!("noise_{j}")).collect();
    let mut header: Vec<String> = informative.iter().chain(&proxies).chain(&noise).cloned().collect();
    header.push("group".into());
    header.push("y".into());

    let strengths: Vec<f64> = (0..spec.proxies).map(|m| spec.proxy_strength(m)).collect();
    let mut rng = stream_rng(spec.seed, 0x5359_4e54, 0);
    let rows = (0..spec.rows)
        .map(|_| {
            let g = f64::from(u8::from(rng.random_bool(0.5)));
            let mut row = Vec::with_capacity(header.len());
            let mut latent = spec.outcome_coupling * spec.bias * (2.0 * g - 1.0);
            let mut weight = 1.0;
            for _ in 0..spec.informative {
                let x: f64 = rng.sample(StandardNormal);
                latent += weight * x;
                weight *= 0.7;
                row.push(x);
            }
            for &s in &strengths {
                let z: f64 = rng.sample(StandardNormal);
                row.push(s * g + (1.0 - s) * z);
            }
            for _ in 0..spec.noise {
                row.push(rng.sample(StandardNormal));
            }
            let e: f64 = rng.sample(StandardNormal);
            latent += spec.noise_sd * e;
            row.push(g);
            row.push(f64::from(u8::from(latent > 0.0)));
            row
        })
        .collect();
    Ok(SynthData {
        header,
        rows,
        roles: SynthRoles {
            target: "y".into(),
            protected: "group".into(),
            informative,
            proxies,
            proxy_strengths: strengths,
            noise,
            spec: spec.clone(),
        },
    })
}

/// Sidecar path for a generated CSV: `data.csv` -> `data.roles.json`.
pub fn roles_path(csv: &Path) -> PathBuf {
    csv.with_extension("roles.json")
}

/// Writes the CSV and its roles sidecar; returns the sidecar path.
pub fn generate_synthetic(spec: &SynthSpec, out: &Path) -> Result<PathBuf> {
    let data = synthesize(spec)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(&data.header)?;
    let n = data.header.len();
    for row in &data.rows {
        let cells = row.iter().enumerate().map(|(c, v)| {
            // group and label are written as integers
            if c + 2 >= n {
                format!("{v:.0}")
            } else {
                v.to_string()
            }
        });
        w.write_record(cells)?;
    }
    w.flush()?;
    let sidecar = roles_path(out);
    std::fs::write(&sidecar, serde_json::to_vec_pretty(&data.roles)?)?;
    Ok(sidecar)
}
