//! Experiment identifiers, per-figure defaults and configuration loading.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::analytic::Readout;
use crate::error::{Error, Result};
use crate::model::{GaussianSpec, InternalState, PacketKind, ScaledParams, SpatialGrid};
use crate::propagator::{GaugeMode, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig10,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::Fig1,
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
        ExperimentId::Fig7,
        ExperimentId::Fig8,
        ExperimentId::Fig10,
        ExperimentId::Custom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Fig1 => "fig1",
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
            ExperimentId::Fig7 => "fig7",
            ExperimentId::Fig8 => "fig8",
            ExperimentId::Fig10 => "fig10",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Every tunable of a run. Field names double as configuration keys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParameters {
    pub v0: f64,
    pub delta0: f64,
    pub force: f64,
    pub n: u32,
    pub kappa: f64,
    pub omega: f64,
    pub chirped: bool,

    pub k0: f64,
    pub width_x2: f64,
    pub internal: InternalState,
    /// 0 for a bare packet, otherwise the band of a dressed packet.
    pub band: usize,
    pub center: f64,

    pub n_cells: usize,
    pub n_points: usize,
    pub dt: f64,
    pub gauge: GaugeMode,
    pub truncation: usize,
    /// Number of band populations recorded along trajectories (0 = none).
    pub bands_recorded: usize,
    pub sample_dt: f64,
    /// Interval between density snapshots (0 = none).
    pub density_dt: f64,
    /// Explicit final time; when absent, `periods` Bloch or chirp periods.
    pub t_final: Option<f64>,
    pub periods: f64,

    pub deltas: Vec<f64>,
    pub nu_max: usize,
    pub k_points: usize,
    pub t_points: usize,

    pub forces: Vec<f64>,
    pub window_lo: f64,
    pub window_hi: f64,
    pub window_internal: InternalState,
    pub lz3_tau_factor: f64,
    pub readout: Readout,

    pub kappa_inv: Vec<f64>,
    /// Mean photon number of a coherent-state average (0 = Fock run only).
    pub n_bar: f64,
    pub n_cut: u64,
}

impl Default for RunParameters {
    fn default() -> Self {
        RunParameters {
            v0: 0.2,
            delta0: 0.0,
            force: 0.0,
            n: 1,
            kappa: 0.0,
            omega: 0.0,
            chirped: false,
            k0: 0.0,
            width_x2: 50.0,
            internal: InternalState::Minus,
            band: 0,
            center: 0.0,
            n_cells: 64,
            n_points: 1024,
            dt: 0.004,
            gauge: GaugeMode::Accelerated,
            truncation: crate::spectrum::DEFAULT_TRUNCATION,
            bands_recorded: 3,
            sample_dt: 0.5,
            density_dt: 5.0,
            t_final: None,
            periods: 2.0,
            deltas: Vec::new(),
            nu_max: 6,
            k_points: 201,
            t_points: 129,
            forces: Vec::new(),
            window_lo: 0.0,
            window_hi: 1.0,
            window_internal: InternalState::Plus,
            lz3_tau_factor: 0.25,
            readout: Readout::Adiabatic,
            kappa_inv: Vec::new(),
            n_bar: 0.0,
            n_cut: 10_000,
        }
    }
}

impl RunParameters {
    pub fn defaults(id: ExperimentId) -> Self {
        let base = RunParameters::default();
        match id {
            ExperimentId::Fig1 => RunParameters {
                deltas: vec![0.0, 0.7],
                ..base
            },
            ExperimentId::Fig4 => RunParameters {
                deltas: vec![1.0, -1.0],
                ..base
            },
            ExperimentId::Fig2 => RunParameters {
                force: 0.005,
                periods: 4.0,
                n_cells: 128,
                n_points: 2048,
                ..base
            },
            ExperimentId::Fig3 => RunParameters {
                force: 0.015,
                periods: 4.0,
                n_cells: 128,
                n_points: 2048,
                ..base
            },
            ExperimentId::Fig5 => RunParameters {
                delta0: 1.0,
                force: 0.0025,
                periods: 4.0,
                n_cells: 128,
                n_points: 2048,
                ..base
            },
            ExperimentId::Fig6 => RunParameters {
                delta0: -1.0,
                internal: InternalState::Plus,
                k0: -0.5,
                periods: 1.0,
                forces: (1..=10).map(|i| i as f64 / 500.0).collect(),
                sample_dt: 5.0,
                bands_recorded: 0,
                density_dt: 0.0,
                ..base
            },
            ExperimentId::Fig7 => RunParameters {
                v0: 0.5,
                delta0: 2.0,
                omega: 0.1,
                chirped: true,
                nu_max: 2,
                k_points: 101,
                ..base
            },
            ExperimentId::Fig8 => RunParameters {
                v0: 10.0,
                delta0: 80.0,
                omega: 0.1,
                chirped: true,
                width_x2: 300.0,
                k0: 0.5,
                n_cells: 64,
                n_points: 2048,
                dt: 0.0015,
                bands_recorded: 2,
                density_dt: 1.0,
                ..base
            },
            ExperimentId::Fig10 => RunParameters {
                v0: 0.5,
                force: 0.02,
                kappa_inv: vec![250.0, 500.0, 1000.0],
                n_cells: 32,
                n_points: 1024,
                dt: 0.0018,
                periods: 40.0,
                sample_dt: 1.0,
                density_dt: 20.0,
                bands_recorded: 0,
                ..base
            },
            ExperimentId::Custom => base,
        }
    }

    /// Reduced fig8 regime that keeps `delta0 / V0 = 8`.
    pub fn apply_desk_scale(&mut self, id: ExperimentId) {
        if id == ExperimentId::Fig8 {
            self.v0 = 1.0;
            self.delta0 = 8.0;
            self.width_x2 = 100.0;
            self.omega = 0.1;
            self.n_cells = 64;
            self.n_points = 1024;
            self.dt = 0.004;
        }
    }

    pub fn scaled(&self) -> ScaledParams {
        ScaledParams {
            v0: self.v0,
            delta0: self.delta0,
            force: self.force,
            n: self.n,
            kappa: self.kappa,
            omega: self.omega,
            chirped: self.chirped,
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule::from_params(&self.scaled())
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.n_cells, self.n_points)
    }

    pub fn packet(&self) -> GaussianSpec {
        GaussianSpec {
            k0: self.k0,
            width_x2: self.width_x2,
            kind: if self.band == 0 {
                PacketKind::Bare(self.internal)
            } else {
                PacketKind::Dressed(self.band)
            },
            center: self.center,
        }
    }

    /// Final time for a run with force `force`.
    pub fn final_time_for(&self, force: f64) -> Result<f64> {
        if let Some(t) = self.t_final {
            return Ok(t);
        }
        if force > 0.0 {
            Ok(self.periods / force)
        } else if self.chirped && self.omega > 0.0 {
            Ok(self.periods * 2.0 * std::f64::consts::PI / self.omega)
        } else {
            Err(Error::config(None, "t_final is required without a force or chirp"))
        }
    }

    pub fn final_time(&self) -> Result<f64> {
        self.final_time_for(self.force)
    }

    /// Stride in steps closest to `interval`, at least one.
    pub fn stride(&self, interval: f64) -> usize {
        ((interval / self.dt).round() as usize).max(1)
    }

    /// Checks cross-field consistency.
    pub fn validate(&self, id: ExperimentId) -> Result<()> {
        let bad = |msg: String| Err(Error::config(None, msg));
        self.scaled().validate().map_err(|e| Error::config(None, e.to_string()))?;
        let grid = self.grid().map_err(|e| Error::config(None, e.to_string()))?;
        if !(self.dt > 0.0 && self.dt < grid.max_dt()) {
            return bad(format!(
                "dt = {} violates the stability bound {} of this grid",
                self.dt,
                grid.max_dt()
            ));
        }
        if self.force < 0.0 || self.forces.iter().any(|&f| !(f > 0.0)) {
            return bad("forces must be positive".into());
        }
        if !(self.sample_dt > 0.0) || self.density_dt < 0.0 {
            return bad("sample_dt must be positive and density_dt nonnegative".into());
        }
        if !(self.periods > 0.0) || self.t_final.is_some_and(|t| !(t > 0.0)) {
            return bad("run length must be positive".into());
        }
        if self.truncation < 2 {
            return bad("truncation must be at least 2".into());
        }
        if self.bands_recorded > 2 * self.truncation + 1 || self.nu_max > 2 * self.truncation + 1 {
            return bad("more bands requested than the truncation holds".into());
        }
        if !(self.window_lo < self.window_hi) {
            return bad("window_lo must be below window_hi".into());
        }
        if self.kappa_inv.iter().any(|&k| !(k > 0.0)) {
            return bad("kappa_inv entries must be positive".into());
        }
        if self.n_bar < 0.0 {
            return bad("n_bar must be nonnegative".into());
        }
        if !matches!(id, ExperimentId::Fig1 | ExperimentId::Fig4 | ExperimentId::Fig7) {
            self.packet().validate().map_err(|e| Error::config(None, e.to_string()))?;
        }
        match id {
            ExperimentId::Fig1 | ExperimentId::Fig4 if self.deltas.is_empty() => bad("deltas must not be empty".into()),
            ExperimentId::Fig6 if self.forces.is_empty() => bad("forces must not be empty".into()),
            ExperimentId::Fig10 if self.kappa_inv.is_empty() => bad("kappa_inv must not be empty".into()),
            ExperimentId::Fig7 | ExperimentId::Fig8 if !(self.omega > 0.0) => bad("omega must be positive".into()),
            ExperimentId::Fig1 | ExperimentId::Fig4 | ExperimentId::Fig7 if self.k_points < 2 => {
                bad("k_points must be at least 2".into())
            }
            _ => Ok(()),
        }
    }

    /// Sets one field from a configuration value.
    pub fn set(&mut self, key: &str, value: &toml::Value) -> Result<()> {
        fn num(key: &str, v: &toml::Value) -> Result<f64> {
            match v {
                toml::Value::Float(f) => Ok(*f),
                toml::Value::Integer(i) => Ok(*i as f64),
                _ => Err(Error::config(None, format!("`{key}` expects a number"))),
            }
        }
        fn int(key: &str, v: &toml::Value) -> Result<u64> {
            match v {
                toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
                _ => Err(Error::config(None, format!("`{key}` expects a nonnegative integer"))),
            }
        }
        fn text<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str> {
            v.as_str().ok_or_else(|| Error::config(None, format!("`{key}` expects a string")))
        }
        fn list(key: &str, v: &toml::Value) -> Result<Vec<f64>> {
            match v {
                toml::Value::Array(a) => a.iter().map(|x| num(key, x)).collect(),
                other => Ok(vec![num(key, other)?]),
            }
        }
        fn parsed<T: FromStr<Err = Error>>(key: &str, v: &toml::Value) -> Result<T> {
            text(key, v)?.parse().map_err(|e: Error| Error::config(None, format!("`{key}`: {e}")))
        }
        match key {
            "v0" | "V0" => self.v0 = num(key, value)?,
            "delta0" | "delta" => self.delta0 = num(key, value)?,
            "force" | "F" => self.force = num(key, value)?,
            "n" => self.n = int(key, value)? as u32,
            "kappa" => self.kappa = num(key, value)?,
            "omega" => self.omega = num(key, value)?,
            "chirped" => {
                self.chirped = value
                    .as_bool()
                    .ok_or_else(|| Error::config(None, "`chirped` expects true or false"))?
            }
            "k0" => self.k0 = num(key, value)?,
            "width_x2" => self.width_x2 = num(key, value)?,
            "internal" => self.internal = parsed(key, value)?,
            "band" => self.band = int(key, value)? as usize,
            "center" => self.center = num(key, value)?,
            "n_cells" => self.n_cells = int(key, value)? as usize,
            "n_points" => self.n_points = int(key, value)? as usize,
            "dt" => self.dt = num(key, value)?,
            "gauge" => self.gauge = parsed(key, value)?,
            "truncation" | "M" => self.truncation = int(key, value)? as usize,
            "bands_recorded" => self.bands_recorded = int(key, value)? as usize,
            "sample_dt" => self.sample_dt = num(key, value)?,
            "density_dt" => self.density_dt = num(key, value)?,
            "t_final" => self.t_final = Some(num(key, value)?),
            "periods" => self.periods = num(key, value)?,
            "deltas" => self.deltas = list(key, value)?,
            "nu_max" => self.nu_max = int(key, value)? as usize,
            "k_points" => self.k_points = int(key, value)? as usize,
            "t_points" => self.t_points = int(key, value)? as usize,
            "forces" => self.forces = list(key, value)?,
            "window_lo" => self.window_lo = num(key, value)?,
            "window_hi" => self.window_hi = num(key, value)?,
            "window_internal" => self.window_internal = parsed(key, value)?,
            "lz3_tau_factor" => self.lz3_tau_factor = num(key, value)?,
            "readout" => self.readout = parsed(key, value)?,
            "kappa_inv" => self.kappa_inv = list(key, value)?,
            "n_bar" => self.n_bar = num(key, value)?,
            "n_cut" => self.n_cut = int(key, value)?,
            _ => return Err(Error::config(None, format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

/// Section names accepted in configuration files. Keys may also appear at
/// the top level.
pub const SECTIONS: [&str; 5] = ["physics", "packet", "grid", "run", "sweep"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub params: RunParameters,
    /// Applied overrides in order, as `key -> value` text.
    pub overrides: BTreeMap<String, String>,
    pub out_dir: PathBuf,
    pub desk_scale: bool,
}

impl ExperimentConfig {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentConfig {
            id,
            params: RunParameters::defaults(id),
            overrides: BTreeMap::new(),
            out_dir: PathBuf::from("output").join(id.as_str()),
            desk_scale: false,
        }
    }

    pub fn with_desk_scale(mut self) -> Self {
        self.desk_scale = true;
        self.params.apply_desk_scale(self.id);
        self
    }

    pub fn with_out_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.out_dir = dir.into();
        self
    }

    pub fn apply(&mut self, key: &str, value: &toml::Value) -> Result<()> {
        self.params.set(key, value)?;
        self.overrides.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override; the value is read as a TOML literal,
    /// and bare words are taken as strings.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(None, format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").unwrap(),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        self.apply(key, &value)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate(self.id)
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Parses configuration text on top of the defaults of `id`.
pub fn parse_config(text: &str, id: ExperimentId, desk_scale: bool) -> Result<ExperimentConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        Error::config(line, e.message().trim().to_string())
    })?;
    let mut cfg = ExperimentConfig::new(id);
    if desk_scale {
        cfg = cfg.with_desk_scale();
    }
    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    for (key, value) in table {
        match (key.as_str(), value) {
            ("experiment", toml::Value::String(s)) => {
                let named: ExperimentId = s.parse()?;
                if named != id {
                    return Err(Error::config(
                        line_of_key(text, "experiment"),
                        format!("file is for `{named}` but `{id}` was requested"),
                    ));
                }
            }
            ("out_dir", toml::Value::String(s)) => cfg.out_dir = PathBuf::from(s),
            (section, toml::Value::Table(inner)) => {
                if !SECTIONS.contains(&section) {
                    return Err(Error::config(
                        text.lines().position(|l| l.trim() == format!("[{section}]")).map(|i| i + 1),
                        format!("unknown section `{section}`"),
                    ));
                }
                entries.extend(inner);
            }
            (_, value) => entries.push((key, value)),
        }
    }
    for (key, value) in entries {
        cfg.apply(&key, &value).map_err(|e| match e {
            Error::Config { msg, .. } => Error::config(line_of_key(text, &key), msg),
            other => other,
        })?;
    }
    Ok(cfg)
}

/// Reads a configuration file; figure defaults apply first, file values
/// second.
pub fn load_config(path: &Path, id: ExperimentId, desk_scale: bool) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(None, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, id, desk_scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("", ExperimentId::Fig2, false).unwrap();
        assert_eq!(cfg.params, RunParameters::defaults(ExperimentId::Fig2));
        let p = &cfg.params;
        assert_eq!((p.delta0, p.v0, p.force, p.width_x2, p.k0), (0.0, 0.2, 0.005, 50.0, 0.0));
        assert_eq!(p.internal, InternalState::Minus);
        assert_eq!(p.band, 0);
        assert!(cfg.overrides.is_empty());
    }

    #[test]
    fn force_override_gives_fig3() {
        let cfg = parse_config("[physics]\nforce = 0.015\n", ExperimentId::Fig2, false).unwrap();
        assert_eq!(cfg.params, RunParameters::defaults(ExperimentId::Fig3));
        assert_eq!(cfg.overrides.get("force").map(String::as_str), Some("0.015"));
    }

    #[test]
    fn malformed_line_is_named() {
        let err = parse_config("[physics]\nv0 = 0.2\nforce 0.01\n", ExperimentId::Fig2, false).unwrap_err();
        match err {
            Error::Config { line, .. } => assert_eq!(line, Some(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_and_section() {
        let err = parse_config("v0 = 0.3\nbogus = 1\n", ExperimentId::Fig2, false).unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(2), .. }), "{err:?}");
        let err = parse_config("[extra]\nv0 = 1\n", ExperimentId::Fig2, false).unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(1), .. }));
    }

    #[test]
    fn experiment_mismatch() {
        assert!(parse_config("experiment = \"fig3\"\n", ExperimentId::Fig2, false).is_err());
        assert!(parse_config("experiment = \"fig2\"\n", ExperimentId::Fig2, false).is_ok());
    }

    #[test]
    fn assignments() {
        let mut cfg = ExperimentConfig::new(ExperimentId::Fig6);
        cfg.apply_assignment("internal=minus").unwrap();
        cfg.apply_assignment("forces=[0.01, 0.02]").unwrap();
        cfg.apply_assignment("gauge = direct").unwrap();
        assert_eq!(cfg.params.internal, InternalState::Minus);
        assert_eq!(cfg.params.forces, vec![0.01, 0.02]);
        assert_eq!(cfg.params.gauge, GaugeMode::Direct);
        assert!(cfg.apply_assignment("nonsense").is_err());
        assert!(cfg.apply_assignment("dt=abc").is_err());
    }

    #[test]
    fn conflicts_detected() {
        let mut cfg = ExperimentConfig::new(ExperimentId::Fig2);
        assert!(cfg.validate().is_ok());
        cfg.apply_assignment("dt=0.05").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(ExperimentId::Fig2);
        cfg.apply_assignment("n_points=1000").unwrap();
        assert!(cfg.validate().is_err());
        for id in ExperimentId::ALL {
            let mut c = ExperimentConfig::new(id);
            if id == ExperimentId::Custom {
                c.apply_assignment("t_final=10").unwrap();
            }
            c.validate().unwrap();
            c.with_desk_scale().validate().unwrap();
        }
    }

    #[test]
    fn desk_scale_keeps_ratio() {
        let cfg = ExperimentConfig::new(ExperimentId::Fig8).with_desk_scale();
        assert_eq!(cfg.params.delta0 / cfg.params.v0, 8.0);
        assert_eq!(cfg.params.width_x2, 100.0);
    }

    #[test]
    fn ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
        }
        assert!(matches!("fig9".parse::<ExperimentId>(), Err(Error::UnknownExperiment(_))));
    }
}
