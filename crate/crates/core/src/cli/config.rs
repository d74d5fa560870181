//! Line-oriented `key = value` run configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::CliError;
use crate::gdr::Integrator;
use crate::moyal::{poly_potential, PhaseSpaceGrid, Potential};
use crate::wavelets::{make_family, WaveletFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Evolve,
    Gdr,
    Analyze,
    Selftest,
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subcommand::Evolve => "evolve",
            Subcommand::Gdr => "gdr",
            Subcommand::Analyze => "analyze",
            Subcommand::Selftest => "selftest",
        })
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "evolve" => Ok(Subcommand::Evolve),
            "gdr" => Ok(Subcommand::Gdr),
            "analyze" => Ok(Subcommand::Analyze),
            "selftest" => Ok(Subcommand::Selftest),
            _ => Err("expected one of evolve, gdr, analyze, selftest".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Coherent,
    Cat,
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialState::Coherent => "coherent",
            InitialState::Cat => "cat",
        })
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coherent" => Ok(InitialState::Coherent),
            "cat" => Ok(InitialState::Cat),
            _ => Err("expected `coherent` or `cat`".into()),
        }
    }
}

/// Every effective parameter of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub level_q: u32,
    pub level_p: u32,
    pub hbar: f64,
    pub mass: f64,
    pub potential: Vec<f64>,
    pub family_q: String,
    pub family_p: String,
    pub family_t: String,
    pub moyal_cut: usize,
    pub decoherence: f64,
    pub initial: InitialState,
    pub q0: f64,
    pub p0: f64,
    pub omega: f64,
    pub t_end: f64,
    pub dt: f64,
    pub courant: f64,
    pub method: Integrator,
    pub stride: usize,
    pub gdr_level: u32,
    pub gdr_t_end: f64,
    pub window: f64,
    pub n_t: usize,
    pub ic_weight: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub coarse_level: usize,
    pub slow_level: usize,
    pub cutoff: bool,
    pub epsilon: f64,
    pub ladder: Vec<usize>,
    pub pgm_clip: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Snapshot read by `analyze`.
    pub input: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            subcommand: Subcommand::Evolve,
            q_min: -8.0,
            q_max: 8.0,
            p_min: -8.0,
            p_max: 8.0,
            level_q: 8,
            level_p: 8,
            hbar: 1.0,
            mass: 1.0,
            potential: vec![0.0, 0.0, 0.5],
            family_q: "daubechies-6".into(),
            family_p: "daubechies-6".into(),
            family_t: "daubechies-6".into(),
            moyal_cut: 1,
            decoherence: 0.0,
            initial: InitialState::Coherent,
            q0: 1.0,
            p0: 0.0,
            omega: 1.0,
            t_end: 2.0 * PI,
            dt: 2.0 * PI / 2048.0,
            courant: 0.5,
            method: Integrator::Rk4,
            stride: 256,
            gdr_level: 5,
            gdr_t_end: 0.25,
            window: 0.25,
            n_t: 64,
            ic_weight: 1e3,
            tol: 1e-9,
            max_iter: 3000,
            restart: 200,
            coarse_level: 2,
            slow_level: 5,
            cutoff: false,
            epsilon: 1e-4,
            ladder: vec![64, 128, 256, 512],
            pgm_clip: 0.0,
            seed: 0,
            output_dir: PathBuf::from("out"),
            input: None,
        }
    }
}

/// Recognized keys with a one-line description, in manifest order.
pub const KEYS: &[(&str, &str)] = &[
    ("subcommand", "evolve | gdr | analyze | selftest"),
    ("q_min", "lower edge of the position period"),
    ("q_max", "upper edge of the position period"),
    ("p_min", "lower edge of the momentum period"),
    ("p_max", "upper edge of the momentum period"),
    ("level_q", "2^level_q position points"),
    ("level_p", "2^level_p momentum points"),
    ("hbar", "reduced Planck constant"),
    ("mass", "particle mass"),
    ("potential", "polynomial coefficients u0,u1,u2,..."),
    ("family_q", "wavelet family for q derivatives"),
    ("family_p", "wavelet family for p derivatives"),
    ("family_t", "wavelet family for the time basis"),
    ("moyal_cut", "highest retained Moyal index L"),
    ("decoherence", "momentum diffusion strength D"),
    ("initial", "coherent | cat"),
    ("q0", "initial centre (position)"),
    ("p0", "initial centre (momentum)"),
    ("omega", "width parameter of the initial Gaussian"),
    ("t_end", "evolution horizon"),
    ("dt", "requested time step"),
    ("courant", "factor on the stability bound"),
    ("method", "integrator (rk4)"),
    ("stride", "steps between snapshots"),
    ("gdr_level", "per-axis level of the space-time solve"),
    ("gdr_t_end", "horizon of the space-time solve"),
    ("window", "length of one space-time window"),
    ("n_t", "time basis functions per window"),
    ("ic_weight", "weight of the initial-condition term"),
    ("tol", "GMRES relative residual tolerance"),
    ("max_iter", "GMRES iteration limit"),
    ("restart", "GMRES restart length"),
    ("coarse_level", "coarsest level of the decomposition"),
    ("slow_level", "first level counted as fast"),
    ("cutoff", "run the resolution ladder after evolve (true/false)"),
    ("epsilon", "cutoff tolerance"),
    ("ladder", "per-axis counts for the cutoff ladder"),
    ("pgm_clip", "heatmap clip; 0 uses max|W|"),
    ("seed", "seed for randomized self-test data"),
    ("output_dir", "directory for emitted files"),
    ("input", "snapshot CSV read by analyze"),
];

fn config_error(key: &str, line: Option<usize>, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

fn nearest_key(key: &str) -> &'static str {
    KEYS.iter()
        .map(|(k, _)| *k)
        .min_by_key(|k| strsim::levenshtein(key, k))
        .expect("key table is not empty")
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("`{}` is not a valid list entry", v.trim())))
        .collect()
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_scalar<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse::<T>().map_err(|_| format!("cannot parse `{value}`"))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), CliError> {
        let v = value.trim();
        let wrap = |r: Result<(), String>| r.map_err(|m| config_error(key, line, m));
        match key {
            "subcommand" => wrap(v.parse().map(|x| self.subcommand = x)),
            "q_min" => wrap(parse_scalar(v).map(|x| self.q_min = x)),
            "q_max" => wrap(parse_scalar(v).map(|x| self.q_max = x)),
            "p_min" => wrap(parse_scalar(v).map(|x| self.p_min = x)),
            "p_max" => wrap(parse_scalar(v).map(|x| self.p_max = x)),
            "level_q" => wrap(parse_scalar(v).map(|x| self.level_q = x)),
            "level_p" => wrap(parse_scalar(v).map(|x| self.level_p = x)),
            "hbar" => wrap(parse_scalar(v).map(|x| self.hbar = x)),
            "mass" => wrap(parse_scalar(v).map(|x| self.mass = x)),
            "potential" => wrap(parse_list(v).map(|x| self.potential = x)),
            "family_q" => {
                self.family_q = v.to_string();
                Ok(())
            }
            "family_p" => {
                self.family_p = v.to_string();
                Ok(())
            }
            "family_t" => {
                self.family_t = v.to_string();
                Ok(())
            }
            "moyal_cut" => wrap(parse_scalar(v).map(|x| self.moyal_cut = x)),
            "decoherence" => wrap(parse_scalar(v).map(|x| self.decoherence = x)),
            "initial" => wrap(v.parse().map(|x| self.initial = x)),
            "q0" => wrap(parse_scalar(v).map(|x| self.q0 = x)),
            "p0" => wrap(parse_scalar(v).map(|x| self.p0 = x)),
            "omega" => wrap(parse_scalar(v).map(|x| self.omega = x)),
            "t_end" => wrap(parse_scalar(v).map(|x| self.t_end = x)),
            "dt" => wrap(parse_scalar(v).map(|x| self.dt = x)),
            "courant" => wrap(parse_scalar(v).map(|x| self.courant = x)),
            "method" => wrap(v.parse().map(|x| self.method = x).map_err(|e: crate::gdr::GdrError| e.to_string())),
            "stride" => wrap(parse_scalar(v).map(|x| self.stride = x)),
            "gdr_level" => wrap(parse_scalar(v).map(|x| self.gdr_level = x)),
            "gdr_t_end" => wrap(parse_scalar(v).map(|x| self.gdr_t_end = x)),
            "window" => wrap(parse_scalar(v).map(|x| self.window = x)),
            "n_t" => wrap(parse_scalar(v).map(|x| self.n_t = x)),
            "ic_weight" => wrap(parse_scalar(v).map(|x| self.ic_weight = x)),
            "tol" => wrap(parse_scalar(v).map(|x| self.tol = x)),
            "max_iter" => wrap(parse_scalar(v).map(|x| self.max_iter = x)),
            "restart" => wrap(parse_scalar(v).map(|x| self.restart = x)),
            "coarse_level" => wrap(parse_scalar(v).map(|x| self.coarse_level = x)),
            "slow_level" => wrap(parse_scalar(v).map(|x| self.slow_level = x)),
            "cutoff" => wrap(parse_bool(v).map(|x| self.cutoff = x)),
            "epsilon" => wrap(parse_scalar(v).map(|x| self.epsilon = x)),
            "ladder" => wrap(parse_list(v).map(|x| self.ladder = x)),
            "pgm_clip" => wrap(parse_scalar(v).map(|x| self.pgm_clip = x)),
            "seed" => wrap(parse_scalar(v).map(|x| self.seed = x)),
            "output_dir" => {
                self.output_dir = PathBuf::from(v);
                Ok(())
            }
            "input" => {
                self.input = (!v.is_empty()).then(|| PathBuf::from(v));
                Ok(())
            }
            other => Err(config_error(
                other,
                line,
                format!("unknown key; did you mean `{}`?", nearest_key(other)),
            )),
        }
    }

    /// Effective value of every key, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let values: BTreeMap<&str, String> = [
            ("subcommand", self.subcommand.to_string()),
            ("q_min", format!("{:?}", self.q_min)),
            ("q_max", format!("{:?}", self.q_max)),
            ("p_min", format!("{:?}", self.p_min)),
            ("p_max", format!("{:?}", self.p_max)),
            ("level_q", self.level_q.to_string()),
            ("level_p", self.level_p.to_string()),
            ("hbar", format!("{:?}", self.hbar)),
            ("mass", format!("{:?}", self.mass)),
            ("potential", list(&self.potential)),
            ("family_q", self.family_q.clone()),
            ("family_p", self.family_p.clone()),
            ("family_t", self.family_t.clone()),
            ("moyal_cut", self.moyal_cut.to_string()),
            ("decoherence", format!("{:?}", self.decoherence)),
            ("initial", self.initial.to_string()),
            ("q0", format!("{:?}", self.q0)),
            ("p0", format!("{:?}", self.p0)),
            ("omega", format!("{:?}", self.omega)),
            ("t_end", format!("{:?}", self.t_end)),
            ("dt", format!("{:?}", self.dt)),
            ("courant", format!("{:?}", self.courant)),
            ("method", self.method.to_string()),
            ("stride", self.stride.to_string()),
            ("gdr_level", self.gdr_level.to_string()),
            ("gdr_t_end", format!("{:?}", self.gdr_t_end)),
            ("window", format!("{:?}", self.window)),
            ("n_t", self.n_t.to_string()),
            ("ic_weight", format!("{:?}", self.ic_weight)),
            ("tol", format!("{:?}", self.tol)),
            ("max_iter", self.max_iter.to_string()),
            ("restart", self.restart.to_string()),
            ("coarse_level", self.coarse_level.to_string()),
            ("slow_level", self.slow_level.to_string()),
            ("cutoff", self.cutoff.to_string()),
            ("epsilon", format!("{:?}", self.epsilon)),
            ("ladder", self.ladder.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
            ("pgm_clip", format!("{:?}", self.pgm_clip)),
            ("seed", self.seed.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
            ("input", self.input.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
        ]
        .into_iter()
        .collect();
        KEYS.iter().map(|(k, _)| (*k, values[k].clone())).collect()
    }

    pub fn grid(&self) -> Result<PhaseSpaceGrid, CliError> {
        self.grid_at(self.level_q, self.level_p)
    }

    pub fn grid_at(&self, level_q: u32, level_p: u32) -> Result<PhaseSpaceGrid, CliError> {
        PhaseSpaceGrid::new(
            self.q_min,
            self.q_max - self.q_min,
            self.p_min,
            self.p_max - self.p_min,
            level_q,
            level_p,
            self.hbar,
            self.mass,
        )
        .map_err(|e| config_error("level_q", None, e.to_string()))
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        poly_potential(&self.potential).map_err(|e| config_error("potential", None, e.to_string()))
    }

    pub fn family(&self, key: &str) -> Result<WaveletFamily, CliError> {
        let name = match key {
            "family_q" => &self.family_q,
            "family_p" => &self.family_p,
            _ => &self.family_t,
        };
        make_family(name).map_err(|e| config_error(key, None, e.to_string()))
    }

    /// Checks every value against the preconditions of the modules it feeds.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_error(key, None, format!("must be positive and finite, got {v}")))
            }
        };
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(config_error(key, None, format!("must be finite, got {v}")))
            }
        };
        for (k, v) in [("q_min", self.q_min), ("p_min", self.p_min), ("q0", self.q0), ("p0", self.p0)] {
            finite(k, v)?;
        }
        if !(self.q_max > self.q_min) {
            return Err(config_error("q_max", None, "must exceed q_min"));
        }
        if !(self.p_max > self.p_min) {
            return Err(config_error("p_max", None, "must exceed p_min"));
        }
        for (k, v) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("omega", self.omega),
            ("dt", self.dt),
            ("courant", self.courant),
            ("window", self.window),
            ("gdr_t_end", self.gdr_t_end),
            ("ic_weight", self.ic_weight),
            ("tol", self.tol),
        ] {
            positive(k, v)?;
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(config_error("t_end", None, "must be finite and nonnegative"));
        }
        if !(self.decoherence >= 0.0) || !self.decoherence.is_finite() {
            return Err(config_error("decoherence", None, "must be finite and nonnegative"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(config_error("epsilon", None, "must be nonnegative"));
        }
        if !(self.pgm_clip >= 0.0) || !self.pgm_clip.is_finite() {
            return Err(config_error("pgm_clip", None, "must be finite and nonnegative (0 selects max|W|)"));
        }
        for (k, v) in [("stride", self.stride), ("max_iter", self.max_iter), ("restart", self.restart)] {
            if v == 0 {
                return Err(config_error(k, None, "must be at least 1"));
            }
        }
        for (k, v) in [("level_q", self.level_q), ("level_p", self.level_p), ("gdr_level", self.gdr_level)] {
            if !(crate::moyal::MIN_LEVEL..=14).contains(&v) {
                return Err(config_error(k, None, format!("must lie in {}..=14, got {v}", crate::moyal::MIN_LEVEL)));
            }
        }
        let finest = self.level_q.min(self.level_p) as usize;
        if self.coarse_level >= finest {
            return Err(config_error("coarse_level", None, format!("must be below {finest}")));
        }
        if self.slow_level < self.coarse_level || self.slow_level >= finest {
            return Err(config_error(
                "slow_level",
                None,
                format!("must lie in {}..{finest}", self.coarse_level),
            ));
        }
        if self.ladder.len() < 2 || self.ladder.windows(2).any(|w| w[1] <= w[0]) || self.ladder.iter().any(|n| !n.is_power_of_two()) {
            return Err(config_error("ladder", None, "needs at least two increasing powers of two"));
        }
        if !self.n_t.is_power_of_two() || self.n_t < 4 {
            return Err(config_error("n_t", None, "must be a power of two, at least 4"));
        }
        let potential = self.potential()?;
        for key in ["family_q", "family_p", "family_t"] {
            self.family(key)?;
        }
        let family_t = self.family("family_t")?;
        if self.n_t < family_t.support_width() {
            return Err(config_error(
                "n_t",
                None,
                format!("must exceed {} for {}", family_t.support_width() - 1, family_t.name()),
            ));
        }
        let grid = self.grid()?;
        let highest = 2 * self.moyal_cut.min(potential.degree().saturating_sub(1) / 2) + 1;
        for (key, order) in [("family_q", 1), ("family_p", highest.max(if self.decoherence > 0.0 { 2 } else { 1 }))] {
            let f = self.family(key)?;
            // the balanced split puts at most ⌈d/2⌉ derivatives on each factor
            if !f.admits_derivative(order.div_ceil(2)) {
                return Err(config_error(
                    key,
                    None,
                    format!(
                        "{} cannot represent derivative order {order} (needs smoothness above {}, Sobolev estimate {:.2}); choose a longer filter",
                        f.name(),
                        order.div_ceil(2),
                        f.sobolev_estimate()
                    ),
                ));
            }
        }
        if grid.nq() < 2 * self.family("family_q")?.support_width() || grid.np() < 2 * self.family("family_p")?.support_width() {
            return Err(config_error("level_q", None, "grid is too small for the filter band"));
        }
        Ok(())
    }
}

/// Parses a configuration document; `#` starts a comment and later keys win.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    apply_document(&mut config, text)?;
    config.validate()?;
    Ok(config)
}

/// Applies the assignments of `text` on top of `config` without validating.
pub fn apply_document(config: &mut RunConfig, text: &str) -> Result<(), CliError> {
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(content, Some(line), "expected `key = value`"))?;
        config.set(key.trim(), value, Some(line))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.level_q, c.level_p), (8, 8));
        assert_eq!(c.potential, vec![0.0, 0.0, 0.5]);
        assert_eq!(c.family_q, "daubechies-6");
        assert_eq!((c.moyal_cut, c.decoherence), (1, 0.0));
    }

    #[test]
    fn comments_and_overrides() {
        let c = parse_config("# header\npotential = 0,0,-1,0,0.1  # double well\n\nmoyal_cut = 2\nmoyal_cut = 1\n").unwrap();
        assert_eq!(c.potential, vec![0.0, 0.0, -1.0, 0.0, 0.1]);
        assert_eq!(c.moyal_cut, 1);
    }

    #[test]
    fn bad_family_names_the_key() {
        let e = parse_config("family_q = daubechies-99").unwrap_err();
        let text = e.to_string();
        assert!(text.contains("family_q"), "{text}");
        assert!(text.contains("daubechies"), "{text}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let e = parse_config("a = 1\nlevl_q = 7").unwrap_err();
        let text = e.to_string();
        assert!(text.contains("line 1") || text.contains("line 2"), "{text}");
        let e = parse_config("levl_q = 7").unwrap_err().to_string();
        assert!(e.contains("level_q") && e.contains("line 1"), "{e}");
    }

    #[test]
    fn malformed_value_cites_line() {
        let e = parse_config("hbar = 1\n\ndt = fast").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("dt"), "{e}");
        let e = parse_config("no equals sign").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
    }

    #[test]
    fn values_are_validated() {
        assert!(parse_config("hbar = -1").unwrap_err().to_string().contains("hbar"));
        assert!(parse_config("q_max = -9").unwrap_err().to_string().contains("q_max"));
        assert!(parse_config("n_t = 48").unwrap_err().to_string().contains("n_t"));
        assert!(parse_config("level_q = 3").unwrap_err().to_string().contains("level_q"));
        // a sextic potential needs a fifth derivative
        let e = parse_config("potential = 0,0,0,0,0,0,1\nmoyal_cut = 3").unwrap_err().to_string();
        assert!(e.contains("family_p"), "{e}");
        assert!(parse_config("potential = 0,0,0,0,0,0,1\nmoyal_cut = 3\nfamily_p = daubechies-10").is_ok());
    }

    #[test]
    fn entries_round_trip() {
        let c = RunConfig {
            potential: vec![0.0, 0.0, -1.0, 0.0, 0.1],
            decoherence: 0.1,
            initial: InitialState::Cat,
            ..RunConfig::default()
        };
        let text: String = c.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}
