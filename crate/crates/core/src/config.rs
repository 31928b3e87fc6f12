//! TOML scenario files.
//!
//! ```toml
//! [room]
//! x_len_m = 7.5
//! y_len_m = 5.0
//!
//! [grid]
//! grid_cols = 2
//! grid_rows = 2
//!
//! [physical]            # every key optional
//! snr_db = 20.0         # or noise_std = 0.04
//! interference_factor = 0.0
//!
//! [receivers]           # count_x/count_y lattice, or explicit points
//! count_x = 16
//! count_y = 10
//!
//! [constraints]
//! rate_min = 0.8
//! illum_min = 0.4
//! uniformity_max = 0.16 # inf (or omitted) leaves uniformity unconstrained
//!
//! [solver]              # every key optional
//! max_outer = 50
//! gamma = 1.0
//! ```
//!
//! Errors name the offending key as `section.key`.

use std::path::Path;

use toml::{Table, Value};

use crate::error::{PlacementError, Result};
use crate::scene::{noise_std_for_snr, PhysicalParams, Receiver, RoomConfig, Scenario};
use crate::solver::{SolverConfig, StepSchedule};

/// Default reference illuminance for the `snr_db` shorthand.
pub const DEFAULT_SNR_REFERENCE_ILLUM: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub solver: SolverConfig,
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PlacementError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| PlacementError::Config {
        field: "<file>".into(),
        reason: e.message().to_string(),
    })?;
    check_keys("", &root, &["room", "grid", "physical", "receivers", "constraints", "solver"])?;

    let room_t = Section::required(&root, "room")?;
    room_t.allow(&["x_len_m", "y_len_m"])?;
    let grid_t = Section::required(&root, "grid")?;
    grid_t.allow(&["grid_cols", "grid_rows"])?;
    let room = RoomConfig {
        x_len_m: room_t.float("x_len_m")?,
        y_len_m: room_t.float("y_len_m")?,
        grid_cols: grid_t.count("grid_cols")?,
        grid_rows: grid_t.count("grid_rows")?,
    };
    room.validate().map_err(|e| {
        qualify(
            e,
            &[
                ("x_len_m", "room.x_len_m"),
                ("y_len_m", "room.y_len_m"),
                ("grid_cols", "grid.grid_cols"),
                ("grid_rows", "grid.grid_rows"),
            ],
        )
    })?;

    let physical = parse_physical(&Section::optional(&root, "physical")?)?;

    let cons = Section::required(&root, "constraints")?;
    cons.allow(&["rate_min", "illum_min", "uniformity_max"])?;
    let rate_min = cons.float("rate_min")?;
    let illum_min = cons.float("illum_min")?;
    let uniformity_max = cons.float_or("uniformity_max", f64::INFINITY)?;

    let receivers = parse_receivers(&Section::optional(&root, "receivers")?, &room, rate_min, illum_min)?;
    let scenario = Scenario {
        room,
        physical,
        receivers,
        uniformity_max,
    };
    scenario.validate().map_err(|e| {
        qualify(
            e,
            &[
                ("rate_min", "constraints.rate_min"),
                ("illum_min", "constraints.illum_min"),
                ("uniformity_max", "constraints.uniformity_max"),
                ("receivers", "receivers.points"),
            ],
        )
    })?;

    let solver = parse_solver(&Section::optional(&root, "solver")?)?;
    Ok(ExperimentConfig { scenario, solver })
}

fn parse_physical(s: &Section) -> Result<PhysicalParams> {
    s.allow(&[
        "detector_area_m2",
        "semi_angle_deg",
        "fov_semi_angle_deg",
        "refractive_index",
        "noise_std",
        "snr_db",
        "snr_reference_illum",
        "illum_target",
        "height_m",
        "interference_factor",
    ])?;
    let d = PhysicalParams::default();
    let noise_std = match (s.has("noise_std"), s.has("snr_db")) {
        (true, true) => return Err(s.error("snr_db", "give either noise_std or snr_db, not both")),
        (true, false) => s.float("noise_std")?,
        (false, true) => {
            let r = s.float_or("snr_reference_illum", DEFAULT_SNR_REFERENCE_ILLUM)?;
            if !(r.is_finite() && r > 0.0) {
                return Err(s.error("snr_reference_illum", "must be finite and > 0"));
            }
            noise_std_for_snr(s.float("snr_db")?, r)
        }
        (false, false) => d.noise_std,
    };
    if s.has("snr_reference_illum") && !s.has("snr_db") {
        return Err(s.error("snr_reference_illum", "only meaningful together with snr_db"));
    }
    let p = PhysicalParams {
        detector_area_m2: s.float_or("detector_area_m2", d.detector_area_m2)?,
        semi_angle_deg: s.float_or("semi_angle_deg", d.semi_angle_deg)?,
        fov_semi_angle_deg: s.float_or("fov_semi_angle_deg", d.fov_semi_angle_deg)?,
        refractive_index: s.float_or("refractive_index", d.refractive_index)?,
        noise_std,
        illum_target: s.float_or("illum_target", d.illum_target)?,
        height_m: s.float_or("height_m", d.height_m)?,
        interference_factor: s.float_or("interference_factor", d.interference_factor)?,
    };
    p.validate().map_err(|e| match e {
        PlacementError::Config { field, reason } => s.error(&field, reason),
        other => other,
    })?;
    Ok(p)
}

fn parse_receivers(s: &Section, room: &RoomConfig, rate_min: f64, illum_min: f64) -> Result<Vec<Receiver>> {
    s.allow(&["count_x", "count_y", "points"])?;
    if s.has("points") {
        if s.has("count_x") || s.has("count_y") {
            return Err(s.error("points", "give either points or count_x/count_y, not both"));
        }
        let Some(Value::Array(items)) = s.get("points") else {
            return Err(s.error("points", "expected an array of [x, y] pairs"));
        };
        return items
            .iter()
            .enumerate()
            .map(|(k, item)| {
                let pair = item.as_array().filter(|a| a.len() == 2);
                let xy = pair.and_then(|a| Some((as_float(&a[0])?, as_float(&a[1])?)));
                let (x_m, y_m) =
                    xy.ok_or_else(|| s.error("points", format!("entry {} is not an [x, y] pair of numbers", k + 1)))?;
                Ok(Receiver {
                    x_m,
                    y_m,
                    rate_min,
                    illum_min,
                })
            })
            .collect();
    }
    let cx = if s.has("count_x") { s.count("count_x")? } else { 16 };
    let cy = if s.has("count_y") { s.count("count_y")? } else { 10 };
    Ok(crate::scene::uniform_receiver_grid(room, cx, cy, rate_min, illum_min))
}

fn parse_solver(s: &Section) -> Result<SolverConfig> {
    s.allow(&[
        "max_outer",
        "max_x_rounds",
        "max_y_rounds",
        "max_sweeps",
        "max_dual_iters",
        "gamma",
        "step_schedule",
        "dual_gap_tol",
        "initial_multiplier",
        "power_tol",
        "bisection_tol",
        "scan_points",
        "oracle_step",
    ])?;
    let d = SolverConfig::default();
    let mut c = d.clone();
    let count = |k: &str, dflt: usize| if s.has(k) { s.count(k) } else { Ok(dflt) };
    c.max_outer = count("max_outer", d.max_outer)?;
    c.max_x_rounds = count("max_x_rounds", d.max_x_rounds)?;
    c.max_y_rounds = count("max_y_rounds", d.max_y_rounds)?;
    c.max_sweeps = count("max_sweeps", d.max_sweeps)?;
    c.scan_points = count("scan_points", d.scan_points)?;
    c.dual.max_iterations = count("max_dual_iters", d.dual.max_iterations)?;
    c.dual.gamma = s.float_or("gamma", d.dual.gamma)?;
    c.dual.gap_tol = s.float_or("dual_gap_tol", d.dual.gap_tol)?;
    c.dual.initial_multiplier = s.float_or("initial_multiplier", d.dual.initial_multiplier)?;
    c.power_tol = s.float_or("power_tol", d.power_tol)?;
    c.bisection_tol = s.float_or("bisection_tol", d.bisection_tol)?;
    c.oracle_step = s.float_or("oracle_step", d.oracle_step)?;
    if let Some(v) = s.get("step_schedule") {
        c.dual.schedule = match v.as_str() {
            Some("diminishing") => StepSchedule::Diminishing,
            Some("constant") => StepSchedule::Constant,
            _ => return Err(s.error("step_schedule", "expected \"diminishing\" or \"constant\"")),
        };
    }
    c.validate().map_err(|e| match e {
        PlacementError::Config { field, reason } => s.error(&field, reason),
        other => other,
    })?;
    Ok(c)
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Replaces bare field names from validation errors with their file keys.
fn qualify(e: PlacementError, keys: &[(&str, &str)]) -> PlacementError {
    match e {
        PlacementError::Config { field, reason } => {
            let key = keys.iter().find(|(f, _)| *f == field).map(|(_, k)| k.to_string());
            PlacementError::Config {
                field: key.unwrap_or(field),
                reason,
            }
        }
        other => other,
    }
}

fn check_keys(prefix: &str, t: &Table, allowed: &[&str]) -> Result<()> {
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(PlacementError::Config {
                field: format!("{prefix}{k}"),
                reason: "unknown key".into(),
            });
        }
    }
    Ok(())
}

struct Section<'a> {
    name: &'a str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn required(root: &'a Table, name: &'a str) -> Result<Self> {
        let s = Self::optional(root, name)?;
        if s.table.is_none() {
            return Err(PlacementError::Config {
                field: name.into(),
                reason: "missing section".into(),
            });
        }
        Ok(s)
    }

    fn optional(root: &'a Table, name: &'a str) -> Result<Self> {
        match root.get(name) {
            None => Ok(Self { name, table: None }),
            Some(Value::Table(t)) => Ok(Self { name, table: Some(t) }),
            Some(_) => Err(PlacementError::Config {
                field: name.into(),
                reason: "expected a table".into(),
            }),
        }
    }

    fn error(&self, key: &str, reason: impl Into<String>) -> PlacementError {
        PlacementError::Config {
            field: format!("{}.{key}", self.name),
            reason: reason.into(),
        }
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.table {
            Some(t) => check_keys(&format!("{}.", self.name), t, keys),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    fn float(&self, key: &str) -> Result<f64> {
        match self.get(key) {
            None => Err(self.error(key, "missing required key")),
            Some(v) => as_float(v).ok_or_else(|| self.error(key, format!("expected a number, got {}", v.type_str()))),
        }
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.has(key) {
            self.float(key)
        } else {
            Ok(default)
        }
    }

    fn count(&self, key: &str) -> Result<usize> {
        match self.get(key) {
            None => Err(self.error(key, "missing required key")),
            Some(Value::Integer(i)) if *i >= 1 => Ok(*i as usize),
            Some(Value::Integer(i)) => Err(self.error(key, format!("must be >= 1, got {i}"))),
            Some(v) => Err(self.error(key, format!("expected an integer, got {}", v.type_str()))),
        }
    }
}
