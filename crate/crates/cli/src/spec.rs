//! Experiment specs: flat key-value TOML files merged with command-line flags.

use ferroconnect::error::Error;
use ferroconnect::geom::Vec2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Connect,
    Lift,
    AuditLowerBound,
    Simulate,
    Renorm,
    Pipeline,
}

/// Everything a run consumes. A run is a pure function of this value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub mode: Mode,
    /// `disk`, `kidney`, `rounded-square`, `ellipse:a,b`, `disk:r` or a domain file.
    pub domain: String,
    /// Explicit singular points; drawn from the seed when empty.
    pub points: Vec<[f64; 2]>,
    pub degree: i32,
    pub beta: f64,
    /// Continuation levels; the last one is the target.
    pub eps: Vec<f64>,
    pub grid: usize,
    pub restarts: usize,
    pub noise: f64,
    pub samples: usize,
    pub seed: u64,
    /// Multi-start count of the `W_beta` minimization.
    pub starts: usize,
    /// Minimal boundary and pairwise distance of drawn points.
    pub margin: f64,
    pub minimize: bool,
    /// Field file (text or binary) to lift instead of a synthetic vortex field.
    pub field: Option<String>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            mode: Mode::Connect,
            domain: "disk".into(),
            points: Vec::new(),
            degree: 1,
            beta: 1.0,
            eps: vec![0.04],
            grid: 128,
            restarts: 0,
            noise: 0.1,
            samples: 1000,
            seed: 0,
            starts: 4,
            margin: 0.15,
            minimize: false,
            field: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |field: &str, why: String| Err(Error::Input(format!("spec field `{field}`: {why}")));
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e < 0.5)) {
            return bad("eps", format!("need a nonempty list in (0, 1/2), got {:?}", self.eps));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta", format!("need beta >= 0, got {}", self.beta));
        }
        if self.grid < 8 {
            return bad("grid", format!("need at least 8 cells, got {}", self.grid));
        }
        if !(self.noise >= 0.0) {
            return bad("noise", format!("need noise >= 0, got {}", self.noise));
        }
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return bad("margin", format!("need margin in (0, 1/2), got {}", self.margin));
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed", format!("must fit a signed 64-bit integer, got {}", self.seed));
        }
        if self.points.iter().flatten().any(|x| !x.is_finite()) {
            return bad("points", "non-finite coordinate".into());
        }
        Ok(())
    }

    pub fn point_list(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| Vec2::new(p[0], p[1])).collect()
    }

    pub fn target_eps(&self) -> f64 {
        *self.eps.last().expect("validated")
    }

    /// Generator for one module, split from the run seed by a fixed label.
    pub fn rng(&self, label: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.module_seed(label))
    }

    /// Seed handed to library routines that take their own seed. The top bit
    /// is cleared so that manifests can store it as a TOML integer.
    pub fn module_seed(&self, label: &str) -> u64 {
        (self.seed ^ fnv1a(label)) & i64::MAX as u64
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn toml_round_trip() {
        let s = ExperimentSpec {
            mode: Mode::Pipeline,
            points: vec![[0.1, -0.2], [0.3, 0.4]],
            eps: vec![0.08, 0.04],
            field: Some("q.txt".into()),
            ..Default::default()
        };
        assert_eq!(ExperimentSpec::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentSpec::from_toml("mode = \"connect\"\ngird = 3\n").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let s = ExperimentSpec {
            eps: vec![0.7],
            ..Default::default()
        };
        assert!(s.validate().unwrap_err().to_string().contains("`eps`"));
    }

    #[test]
    fn module_streams_differ_and_repeat() {
        let s = ExperimentSpec::default();
        let a: u64 = s.rng("simulate").gen();
        let b: u64 = s.rng("renorm").gen();
        assert_ne!(a, b);
        assert_eq!(a, s.rng("simulate").gen::<u64>());
    }
}
