//! Run configuration: flat `section.key = value` lines.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional; unknown keys and repeated keys are errors. Relative paths are
//! resolved against the directory holding the config file.
//!
//! | key | values | default |
//! |-----|--------|---------|
//! | `chart.domain` | `torus`, `disk` | `torus` |
//! | `chart.nx`, `chart.ny` | 8 ..= 4096 (`ny` defaults to `nx`; the disk needs `nx = ny`) | 64 |
//! | `chart.period_x`, `chart.period_y` | > 0 | 1 |
//! | `chart.radius` | > 0 | 1 |
//! | `chart.spin` | `pp`, `pa`, `ap`, `aa` | `aa` |
//! | `reaction.kind` | `scalar_h`, `general_cubic`, `curvature`, `chiral` | `scalar_h` |
//! | `reaction.h` | finite | 1 |
//! | `reaction.n` | 1 ..= 4 (general cubic and curvature only) | 1 |
//! | `reaction.kappa` | finite | 1 |
//! | `reaction.preset` | `su2`, `nil`, `sl2` | `su2` |
//! | `solver.damping` | (0, 1] | 0.5 |
//! | `solver.tol` | > 0 | 1e-8 |
//! | `solver.max_iter` | 1 ..= 100000 | 2000 |
//! | `solver.guard` | > 0 | 0.5 |
//! | `solver.newton` | `true`, `false` | `true` |
//! | `solver.newton_tol` | > 0 | 1e-10 |
//! | `solver.newton_steps` | 0 ..= 100 | 8 |
//! | `problem.kind` | `zero`, `manufactured` | `zero` |
//! | `problem.amplitude` | >= 0 | 0.5 |
//! | `problem.seed_amplitude` | >= 0 | 0.1 |
//! | `analysis.epsilon` | > 0 | 0.6 |
//! | `analysis.radii` | comma list, decreasing, > 0 | `0.08,0.06,0.04` |
//! | `analysis.delta` | > 0 | 0.15 |
//! | `analysis.big_r` | > 0 | 8 |
//! | `analysis.limit_n` | 9 ..= 1025 | 65 |
//! | `analysis.h0` | >= 0 | 1 |
//! | `analysis.guard` | > 0 | 0.5 |
//! | `input.field` | path | none |
//! | `input.sequence` | comma list of paths | empty |
//! | `input.background` | path | none |
//! | `output.dir` | path | `out` |
//! | `run.seed` | u64 | 0 |
//! | `verify.broken_stencil` | `true`, `false` | `false` |
//! | `verify.levels` | comma list of 3 increasing sizes >= 16 | `32,64,128` |
//! | `verify.trials` | 1 ..= 1000 | 10 |
//! | `generate.kind` | `plane`, `enneper`, `planted_single`, `planted_two`, `flat_sequence` | `plane` |
//! | `generate.elements` | 4 ..= 16 | 6 |

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::chart::{GridChart, SpinStructure};
use crate::error::{Result, SpinflowError};
use crate::nonlinear::{ChiralPreset, ReactionSpec, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartDomain {
    Torus,
    Disk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartConfig {
    pub domain: ChartDomain,
    pub nx: usize,
    pub ny: usize,
    pub period_x: f64,
    pub period_y: f64,
    pub radius: f64,
    pub spin: SpinStructure,
}

impl ChartConfig {
    pub fn build(&self) -> Result<Arc<GridChart>> {
        let chart = match self.domain {
            ChartDomain::Torus => GridChart::torus(self.period_x, self.period_y, self.nx, self.ny, self.spin),
            ChartDomain::Disk => GridChart::disk(self.radius, self.nx),
        };
        chart.map(Arc::new).map_err(|e| SpinflowError::Configuration(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReactionKind {
    ScalarH,
    GeneralCubic,
    Curvature,
    Chiral(ChiralPreset),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionConfig {
    pub kind: ReactionKind,
    pub h: f64,
    pub n: usize,
    pub kappa: f64,
}

impl ReactionConfig {
    /// The nonlinearity on `chart`. The general cubic uses
    /// `H^i_{jkl} = h delta_il delta_jk`, i.e. `h sum_j |psi^j|^2 psi^i`; the
    /// curvature form uses the constant-curvature tensor with `kappa`.
    pub fn build(&self, chart: &GridChart) -> Result<ReactionSpec> {
        match self.kind {
            ReactionKind::ScalarH => ReactionSpec::scalar_h(chart, vec![self.h]),
            ReactionKind::GeneralCubic => {
                let h = self.h;
                let t = Tensor4::from_fn(self.n, move |i, j, k, l| if i == l && j == k { h } else { 0.0 });
                ReactionSpec::general_cubic(chart, vec![t])
            }
            ReactionKind::Curvature => ReactionSpec::curvature_cubic(Tensor4::constant_curvature(self.n, self.kappa)),
            ReactionKind::Chiral(p) => ReactionSpec::chiral_preset(chart, p, vec![self.h]),
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            ReactionKind::ScalarH => "scalar_h".into(),
            ReactionKind::GeneralCubic => "general_cubic".into(),
            ReactionKind::Curvature => "curvature".into(),
            ReactionKind::Chiral(p) => format!("chiral_{}", p.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub guard: f64,
    pub newton: bool,
    pub newton_tol: f64,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Zero,
    Manufactured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub amplitude: f64,
    pub seed_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub epsilon: f64,
    pub radii: Vec<f64>,
    pub delta: f64,
    pub big_r: f64,
    pub limit_n: usize,
    pub h0: f64,
    pub guard: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InputConfig {
    pub field: Option<PathBuf>,
    pub sequence: Vec<PathBuf>,
    pub background: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub broken_stencil: bool,
    pub levels: [usize; 3],
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerateKind {
    Plane,
    Enneper,
    PlantedSingle,
    PlantedTwo,
    FlatSequence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateConfig {
    pub kind: GenerateKind,
    pub elements: usize,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub chart: ChartConfig,
    pub reaction: ReactionConfig,
    pub solver: SolverConfig,
    pub problem: ProblemConfig,
    pub analysis: AnalysisConfig,
    pub input: InputConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub verify: VerifyConfig,
    pub generate: GenerateConfig,
}

fn config_err(msg: impl Into<String>) -> SpinflowError {
    SpinflowError::Configuration(msg.into())
}

/// Key/value pairs still waiting to be consumed.
struct Entries {
    map: BTreeMap<String, (String, usize)>,
    base: PathBuf,
}

impl Entries {
    fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_err(format!("line {}: expected `section.key = value`", idx + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if !key.contains('.') {
                return Err(config_err(format!("line {}: key `{key}` has no section prefix", idx + 1)));
            }
            if map.insert(key.to_string(), (value.to_string(), idx + 1)).is_some() {
                return Err(config_err(format!("line {}: key `{key}` given twice", idx + 1)));
            }
        }
        Ok(Self { map, base: base.to_path_buf() })
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn get<T>(&mut self, key: &str, default: T, valid: impl Fn(&T) -> bool, range: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some((value, line)) = self.raw(key) else { return Ok(default) };
        let parsed: T =
            value.parse().map_err(|e| config_err(format!("line {line}: `{key}` = `{value}`: {e}")))?;
        if !valid(&parsed) {
            return Err(config_err(format!("line {line}: `{key}` = `{value}` is outside {range}")));
        }
        Ok(parsed)
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> Result<T> {
        let Some((value, line)) = self.raw(key) else { return Ok(default) };
        options.iter().find(|(name, _)| *name == value).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            config_err(format!("line {line}: `{key}` = `{value}`, expected one of {}", names.join(", ")))
        })
    }

    fn list<T>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some((value, line)) = self.raw(key) else { return Ok(default) };
        value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| config_err(format!("line {line}: `{key}` entry `{s}`: {e}"))))
            .collect()
    }

    fn path(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.iter().next() {
            Some((key, (_, line))) => Err(config_err(format!("line {line}: unknown key `{key}`"))),
            None => Ok(()),
        }
    }
}

fn positive(v: &f64) -> bool {
    v.is_finite() && *v > 0.0
}

fn non_negative(v: &f64) -> bool {
    v.is_finite() && *v >= 0.0
}

impl RunConfig {
    /// Parses and validates config text; `base` anchors relative paths.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut e = Entries::parse(text, base)?;

        let domain = e.choice("chart.domain", ChartDomain::Torus, &[("torus", ChartDomain::Torus), ("disk", ChartDomain::Disk)])?;
        let grid = |v: &usize| (8..=4096).contains(v);
        let nx = e.get("chart.nx", 64, grid, "8..=4096")?;
        let ny = e.get("chart.ny", nx, grid, "8..=4096")?;
        if domain == ChartDomain::Disk && ny != nx {
            return Err(config_err("a disk chart needs chart.nx = chart.ny"));
        }
        let chart = ChartConfig {
            domain,
            nx,
            ny,
            period_x: e.get("chart.period_x", 1.0, positive, "(0, inf)")?,
            period_y: e.get("chart.period_y", 1.0, positive, "(0, inf)")?,
            radius: e.get("chart.radius", 1.0, positive, "(0, inf)")?,
            spin: e.choice(
                "chart.spin",
                SpinStructure::AntiAnti,
                &[
                    ("pp", SpinStructure::PeriodicPeriodic),
                    ("pa", SpinStructure::PeriodicAnti),
                    ("ap", SpinStructure::AntiPeriodic),
                    ("aa", SpinStructure::AntiAnti),
                ],
            )?,
        };

        let kind = e.choice(
            "reaction.kind",
            "scalar_h",
            &[("scalar_h", "scalar_h"), ("general_cubic", "general_cubic"), ("curvature", "curvature"), ("chiral", "chiral")],
        )?;
        let preset = e.choice(
            "reaction.preset",
            ChiralPreset::Su2,
            &[("su2", ChiralPreset::Su2), ("nil", ChiralPreset::Nil), ("sl2", ChiralPreset::Sl2)],
        )?;
        let kind = match kind {
            "scalar_h" => ReactionKind::ScalarH,
            "general_cubic" => ReactionKind::GeneralCubic,
            "curvature" => ReactionKind::Curvature,
            _ => ReactionKind::Chiral(preset),
        };
        let n = e.get("reaction.n", 1, |v| (1..=4).contains(v), "1..=4")?;
        if n != 1 && matches!(kind, ReactionKind::ScalarH | ReactionKind::Chiral(_)) {
            return Err(config_err("reaction.n > 1 needs the general_cubic or curvature reaction"));
        }
        let reaction = ReactionConfig {
            kind,
            h: e.get("reaction.h", 1.0, |v: &f64| v.is_finite(), "finite values")?,
            n,
            kappa: e.get("reaction.kappa", 1.0, |v: &f64| v.is_finite(), "finite values")?,
        };

        let solver = SolverConfig {
            damping: e.get("solver.damping", 0.5, |v| *v > 0.0 && *v <= 1.0, "(0, 1]")?,
            tol: e.get("solver.tol", 1e-8, positive, "(0, inf)")?,
            max_iter: e.get("solver.max_iter", 2000, |v| (1..=100_000).contains(v), "1..=100000")?,
            guard: e.get("solver.guard", 0.5, positive, "(0, inf)")?,
            newton: e.get("solver.newton", true, |_| true, "")?,
            newton_tol: e.get("solver.newton_tol", 1e-10, positive, "(0, inf)")?,
            newton_steps: e.get("solver.newton_steps", 8, |v| *v <= 100, "0..=100")?,
        };

        let problem = ProblemConfig {
            kind: e.choice(
                "problem.kind",
                ProblemKind::Zero,
                &[("zero", ProblemKind::Zero), ("manufactured", ProblemKind::Manufactured)],
            )?,
            amplitude: e.get("problem.amplitude", 0.5, non_negative, "[0, inf)")?,
            seed_amplitude: e.get("problem.seed_amplitude", 0.1, non_negative, "[0, inf)")?,
        };

        let radii: Vec<f64> = e.list("analysis.radii", vec![0.08, 0.06, 0.04])?;
        if radii.is_empty() || !radii.iter().all(positive) || !radii.windows(2).all(|w| w[1] < w[0]) {
            return Err(config_err("analysis.radii must be a non-empty, strictly decreasing list of positive radii"));
        }
        let analysis = AnalysisConfig {
            epsilon: e.get("analysis.epsilon", 0.6, positive, "(0, inf)")?,
            radii,
            delta: e.get("analysis.delta", 0.15, positive, "(0, inf)")?,
            big_r: e.get("analysis.big_r", 8.0, positive, "(0, inf)")?,
            limit_n: e.get("analysis.limit_n", 65, |v| (9..=1025).contains(v), "9..=1025")?,
            h0: e.get("analysis.h0", 1.0, non_negative, "[0, inf)")?,
            guard: e.get("analysis.guard", 0.5, positive, "(0, inf)")?,
        };

        let field = e.raw("input.field").map(|(v, _)| e.path(&v));
        let sequence: Vec<String> = e.list("input.sequence", Vec::new())?;
        let background = e.raw("input.background").map(|(v, _)| e.path(&v));
        let input = InputConfig { field, sequence: sequence.iter().map(|s| e.path(s)).collect(), background };

        let output_dir = e.raw("output.dir").map_or_else(|| e.path("out"), |(v, _)| e.path(&v));
        let seed = e.get("run.seed", 0u64, |_| true, "")?;

        let levels: Vec<usize> = e.list("verify.levels", vec![32, 64, 128])?;
        let levels: [usize; 3] = levels
            .try_into()
            .map_err(|_| config_err("verify.levels needs exactly three sizes"))?;
        if levels[0] < 16 || !levels.windows(2).all(|w| w[1] > w[0]) || levels[2] > 1024 {
            return Err(config_err("verify.levels must increase, start at 16 or more and stay at or below 1024"));
        }
        let verify = VerifyConfig {
            broken_stencil: e.get("verify.broken_stencil", false, |_| true, "")?,
            levels,
            trials: e.get("verify.trials", 10, |v| (1..=1000).contains(v), "1..=1000")?,
        };

        let generate = GenerateConfig {
            kind: e.choice(
                "generate.kind",
                GenerateKind::Plane,
                &[
                    ("plane", GenerateKind::Plane),
                    ("enneper", GenerateKind::Enneper),
                    ("planted_single", GenerateKind::PlantedSingle),
                    ("planted_two", GenerateKind::PlantedTwo),
                    ("flat_sequence", GenerateKind::FlatSequence),
                ],
            )?,
            elements: e.get("generate.elements", 6, |v| (4..=16).contains(v), "4..=16")?,
        };

        e.finish()?;
        Ok(Self { chart, reaction, solver, problem, analysis, input, output_dir, seed, verify, generate })
    }

    /// Reads a config file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map_or_else(PathBuf::new, Path::to_path_buf);
        Self::parse(&text, &base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("/base"))
    }

    #[test]
    fn defaults_and_overrides() {
        let c = parse("# comment\n\nchart.nx = 32\nsolver.damping=1\ninput.sequence = a.spnf, /abs/b.spnf\n").unwrap();
        assert_eq!((c.chart.nx, c.chart.ny), (32, 32));
        assert_eq!(c.solver.damping, 1.0);
        assert_eq!(c.input.sequence, vec![PathBuf::from("/base/a.spnf"), PathBuf::from("/abs/b.spnf")]);
        assert_eq!(c.output_dir, PathBuf::from("/base/out"));
        assert_eq!(c.chart.spin, SpinStructure::AntiAnti);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "chart.nx = 4",
            "chart.bogus = 1",
            "nx = 16",
            "chart.nx = 16\nchart.nx = 32",
            "solver.damping = 0",
            "solver.damping = 1.5",
            "chart.spin = xx",
            "analysis.radii = 0.04, 0.08",
            "reaction.kind = scalar_h\nreaction.n = 2",
            "chart.domain = disk\nchart.nx = 32\nchart.ny = 33",
            "verify.levels = 32, 64",
            "just words",
        ] {
            assert!(matches!(parse(text), Err(SpinflowError::Configuration(_))), "{text}");
        }
    }

    #[test]
    fn chart_builds() {
        let c = parse("chart.domain = disk\nchart.nx = 33\nchart.radius = 2").unwrap();
        let chart = c.chart.build().unwrap();
        assert_eq!(chart.domain(), crate::chart::Domain::Disk { radius: 2.0 });
    }
}
