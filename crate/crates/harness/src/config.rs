//! Experiment configuration: a single JSON document, every field optional except
//! `kind`. Missing fields take per-kind defaults reproducing the worked examples.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use so3_cubics::So3Vector;

use crate::error::HarnessError;

pub const CONFIG_SCHEMA: &str = "so3-cubics/config/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    QuadraticCompare,
    CubicCompare,
    Converge,
    Figure1,
    Figure2,
    Figure3,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::QuadraticCompare => "quadratic-compare",
            Kind::CubicCompare => "cubic-compare",
            Kind::Converge => "converge",
            Kind::Figure1 => "figure1",
            Kind::Figure2 => "figure2",
            Kind::Figure3 => "figure3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Orthographic projection used for SVG figures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    Xy,
    Yz,
    Xz,
    /// Isometric view along (1, 1, 1).
    Iso,
}

impl Projection {
    pub fn project(self, v: So3Vector) -> (f64, f64) {
        let (x, y, z) = (v.x(), v.y(), v.z());
        match self {
            Projection::Xy => (x, y),
            Projection::Yz => (y, z),
            Projection::Xz => (x, z),
            Projection::Iso => {
                let c = 3f64.sqrt() / 2.0;
                ((x - y) * c, z - 0.5 * (x + y))
            }
        }
    }
}

/// Initial conditions, either absolute or as a perturbation of the base `D`:
/// V(t₀) = D + δ·p0, V'(t₀) = δ·p1, V''(t₀) = δ·p2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Absolute {
        v0: So3Vector,
        v1: So3Vector,
        v2: So3Vector,
    },
    Perturbation {
        p0: So3Vector,
        p1: So3Vector,
        p2: So3Vector,
    },
}

impl Initial {
    /// The (1,0,0)-based example with a non-null C on [0, 5] and [0, 25].
    pub fn example_nonnull() -> Self {
        Initial::Absolute {
            v0: So3Vector::new(1.005, 0.006, -0.01),
            v1: So3Vector::new(-0.005, -0.00449, 0.0),
            v2: So3Vector::new(0.001, -0.005, 0.005),
        }
    }

    /// The perturbation direction of the nearly geodesic cubic example.
    pub fn example_geodesic() -> Self {
        Initial::Perturbation {
            p0: So3Vector::new(0.0, 1.0, 0.0),
            p1: So3Vector::new(0.0, 0.0, 0.5),
            p2: So3Vector::new(0.25, 0.25, 0.25),
        }
    }

    /// (V0, V1, V2) at scale δ.
    pub fn resolve(&self, base: So3Vector, delta: f64) -> [So3Vector; 3] {
        match *self {
            Initial::Absolute { v0, v1, v2 } => [v0, v1, v2],
            Initial::Perturbation { p0, p1, p2 } => [base + p0 * delta, p1 * delta, p2 * delta],
        }
    }
}

/// The JSON document as written by users; `None` means "use the default".
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema: Option<String>,
    pub kind: Option<Kind>,
    pub interval: Option<[f64; 2]>,
    pub step: Option<f64>,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub initial: Option<Initial>,
    pub base: Option<So3Vector>,
    pub x0: Option<[[f64; 3]; 3]>,
    pub output_dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub sample_stride: Option<f64>,
    pub projection: Option<Projection>,
    pub error_budget: Option<f64>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A fully resolved and validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema: String,
    pub kind: Kind,
    pub interval: [f64; 2],
    pub step: f64,
    pub delta: f64,
    pub deltas: Vec<f64>,
    pub initial: Initial,
    pub base: So3Vector,
    pub x0: [[f64; 3]; 3],
    /// Left out of reports so that output bytes do not depend on their location.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub sample_stride: f64,
    pub projection: Projection,
    pub error_budget: f64,
}

impl ExperimentConfig {
    /// Defaults for `kind`.
    pub fn defaults(kind: Kind) -> Self {
        let (interval, delta, initial) = match kind {
            Kind::Figure1 | Kind::QuadraticCompare => {
                ([0.0, 5.0], 0.01, Initial::example_nonnull())
            }
            Kind::Figure2 => ([0.0, 25.0], 0.01, Initial::example_nonnull()),
            Kind::Figure3 | Kind::CubicCompare => ([0.0, 10.0], 0.05, Initial::example_geodesic()),
            Kind::Converge => ([0.0, 5.0], 0.04, Initial::example_geodesic()),
        };
        ExperimentConfig {
            schema: CONFIG_SCHEMA.to_string(),
            kind,
            interval,
            step: 1e-3,
            delta,
            deltas: vec![0.04, 0.02],
            initial,
            base: So3Vector::e1(),
            x0: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            output_dir: PathBuf::from("out").join(kind.name()),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
            sample_stride: 0.01,
            projection: Projection::Iso,
            error_budget: 1e-3,
        }
    }

    /// Merges `raw` over the defaults of its kind (or of `kind` when the document
    /// omits it), then validates.
    pub fn resolve(raw: RawConfig, kind: Option<Kind>) -> Result<Self, HarnessError> {
        if let Some(schema) = &raw.schema {
            if schema != CONFIG_SCHEMA {
                return Err(HarnessError::Config(format!(
                    "unsupported schema {schema:?}, expected {CONFIG_SCHEMA:?}"
                )));
            }
        }
        let kind = match (raw.kind, kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(HarnessError::Config(format!(
                    "config kind {} does not match subcommand {}",
                    a.name(),
                    b.name()
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(HarnessError::Config("missing field `kind`".into())),
        };
        let mut c = Self::defaults(kind);
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = raw.$f { c.$f = v; })* };
        }
        take!(
            interval,
            step,
            delta,
            deltas,
            initial,
            base,
            x0,
            output_dir,
            formats,
            sample_stride,
            projection,
            error_budget
        );
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let [t0, t1] = self.interval;
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return bad(format!("interval [{t0}, {t1}] must satisfy t0 < t1"));
        }
        if !(self.step > 0.0 && self.step <= t1 - t0) {
            return bad(format!(
                "step {} must be positive and at most t1 - t0",
                self.step
            ));
        }
        if !(self.sample_stride > 0.0 && self.sample_stride.is_finite()) {
            return bad(format!(
                "sample_stride {} must be positive",
                self.sample_stride
            ));
        }
        if self.sample_stride < self.step {
            return bad("sample_stride must not be smaller than step".into());
        }
        if !(self.error_budget > 0.0) {
            return bad(format!(
                "error_budget {} must be positive",
                self.error_budget
            ));
        }
        if self.formats.is_empty() {
            return bad("formats must name at least one of csv, json, svg".into());
        }
        // δ = 0 is allowed through to the numerics, which report the degeneracy.
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta {} must be non-negative", self.delta));
        }
        if self.kind == Kind::Converge {
            if self.deltas.len() < 2 {
                return bad("converge needs at least two deltas".into());
            }
            if self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                return bad("deltas must be positive".into());
            }
            if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
                return bad("deltas must be strictly decreasing".into());
            }
            if matches!(self.initial, Initial::Absolute { .. }) {
                return bad("converge needs perturbation initial conditions".into());
            }
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Output sample times t₀ + k·stride, k = 0..=⌊(t₁−t₀)/stride⌋.
    pub fn sample_times(&self) -> Vec<f64> {
        let [t0, t1] = self.interval;
        let n = ((t1 - t0) / self.sample_stride + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| t0 + k as f64 * self.sample_stride)
            .collect()
    }
}

/// Command-line overrides, applied after the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub step: Option<f64>,
    pub delta: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, c: &mut ExperimentConfig) -> Result<(), HarnessError> {
        if let Some(out) = &self.out {
            c.output_dir = out.clone();
        }
        if let Some(step) = self.step {
            c.step = step;
        }
        if let Some(delta) = self.delta {
            c.delta = delta;
        }
        c.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for kind in [
            Kind::QuadraticCompare,
            Kind::CubicCompare,
            Kind::Converge,
            Kind::Figure1,
            Kind::Figure2,
            Kind::Figure3,
        ] {
            ExperimentConfig::defaults(kind).validate().unwrap();
        }
    }

    #[test]
    fn merges_over_defaults() {
        let raw = RawConfig::from_json(
            r#"{"schema":"so3-cubics/config/1","kind":"figure3","delta":0.02,
                "initial":{"absolute":{"v0":[1,0,0],"v1":[0,0,0],"v2":[0,1,0]}}}"#,
        )
        .unwrap();
        let c = ExperimentConfig::resolve(raw, None).unwrap();
        assert_eq!(c.kind, Kind::Figure3);
        assert_eq!(c.delta, 0.02);
        assert_eq!(c.interval, [0.0, 10.0]);
        assert!(matches!(c.initial, Initial::Absolute { .. }));
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            r#"{"kind":"figure1","interval":[0,0]}"#,
            r#"{"kind":"figure2","formats":[]}"#,
            r#"{"kind":"converge","deltas":[0.04]}"#,
            r#"{"kind":"converge","deltas":[0.02,0.04]}"#,
            r#"{"kind":"figure1","step":-1}"#,
            r#"{"kind":"figure1","colour":"red"}"#,
            r#"{"schema":"other/9","kind":"figure1"}"#,
            r#"{"interval":[0,1]}"#,
        ];
        for text in cases {
            let r = RawConfig::from_json(text).and_then(|raw| ExperimentConfig::resolve(raw, None));
            assert!(matches!(r, Err(HarnessError::Config(_))), "{text}");
        }
        let raw = RawConfig::from_json(r#"{"kind":"figure1"}"#).unwrap();
        assert!(ExperimentConfig::resolve(raw, Some(Kind::Figure2)).is_err());
    }

    #[test]
    fn sample_count() {
        let mut c = ExperimentConfig::defaults(Kind::Figure1);
        assert_eq!(c.sample_times().len(), 501);
        c.interval = [0.0, 1.0];
        c.sample_stride = 0.3;
        assert_eq!(c.sample_times().len(), 4);
    }

    #[test]
    fn perturbation_resolution() {
        let [v0, v1, v2] = Initial::example_geodesic().resolve(So3Vector::e1(), 0.05);
        assert_eq!(v0, So3Vector::new(1.0, 0.05, 0.0));
        assert_eq!(v1, So3Vector::new(0.0, 0.0, 0.025));
        assert_eq!(v2, So3Vector::new(0.0125, 0.0125, 0.0125));
    }
}
