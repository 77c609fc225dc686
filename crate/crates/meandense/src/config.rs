//! Scenario configuration: TOML with dotted keys, flattened and validated
//! in one pass so that every violation is reported together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use meandense_core::estimate::BandwidthSchedule;
use meandense_core::grains::LengthLaw;
use meandense_core::{Aabb, Grain, IntensityField, MarkDistribution, OrientationLaw, Point, Scenario};
use toml::Value;

pub const DEFAULT_MARK_DRAWS: u64 = 100_000;
pub const DEFAULT_MC_POINTS: u64 = 1_000_000;
pub const DEFAULT_MINKOWSKI_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.02];
pub const DEFAULT_ORACLE_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// All violations found in a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration violation(s): {}", self.violations.len(), self.violations.join("; "))
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Schedule(BandwidthSchedule),
    Fixed(f64),
}

impl Bandwidth {
    pub fn radius(&self, n: u64) -> f64 {
        match self {
            Bandwidth::Schedule(s) => s.radius(n),
            Bandwidth::Fixed(r) => *r,
        }
    }
}

/// Evaluation points, with the cell volume when they are cell midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<Point>,
    pub cell_volume: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSweep {
    pub r_grid: Vec<f64>,
    pub mc_points: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub dim: usize,
    pub grain_dim: usize,
    pub scenario: Scenario,
    pub seed: Option<u64>,
    pub n: Option<u64>,
    pub n_grid: Option<Vec<u64>>,
    pub replications: Option<u64>,
    pub mark_draws: u64,
    pub window: Option<Aabb>,
    pub bandwidth: Bandwidth,
    pub grid: Option<Grid>,
    pub minkowski: RadiusSweep,
    pub oracle: RadiusSweep,
    pub output: Option<PathBuf>,
    /// Every key as written, flattened to dotted form.
    pub echo: BTreeMap<String, Value>,
}

/// Parses and validates a config file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        violations: vec![format!("not valid TOML: {}", e.message())],
    })?;
    let mut flat = BTreeMap::new();
    flatten("", &table, &mut flat);
    let mut rd = Reader::new(flat.clone());
    let cfg = read(&mut rd, flat);
    rd.reject_unknown();
    match cfg {
        Some(cfg) if rd.errors.is_empty() => Ok(cfg),
        _ => Err(ConfigError { violations: rd.errors }),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            _ => {
                out.insert(key, v.clone());
            }
        }
    }
}

struct Reader {
    map: BTreeMap<String, Value>,
    used: BTreeSet<String>,
    errors: Vec<String>,
}

impl Reader {
    fn new(map: BTreeMap<String, Value>) -> Self {
        Reader {
            map,
            used: BTreeSet::new(),
            errors: Vec::new(),
        }
    }

    fn fail(&mut self, key: &str, msg: impl fmt::Display) {
        self.errors.push(format!("`{key}`: {msg}"));
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn get<T>(&mut self, key: &str, required: bool, parse: impl FnOnce(&Value) -> Result<T, String>) -> Option<T> {
        self.used.insert(key.to_string());
        match self.map.get(key) {
            None => {
                if required {
                    self.fail(key, "required key is missing");
                }
                None
            }
            Some(v) => match parse(v) {
                Ok(t) => Some(t),
                Err(msg) => {
                    self.fail(key, msg);
                    None
                }
            },
        }
    }

    fn string(&mut self, key: &str, required: bool) -> Option<String> {
        self.get(key, required, |v| v.as_str().map(str::to_string).ok_or_else(|| "expected a string".into()))
    }

    fn uint(&mut self, key: &str, required: bool, min: u64, max: u64) -> Option<u64> {
        self.get(key, required, |v| uint_value(v, min, max))
    }

    fn float(&mut self, key: &str, required: bool) -> Option<f64> {
        self.get(key, required, float_value)
    }

    fn floats(&mut self, key: &str, required: bool) -> Option<Vec<f64>> {
        self.get(key, required, |v| array(v)?.iter().map(float_value).collect())
    }

    fn uints(&mut self, key: &str, required: bool, min: u64) -> Option<Vec<u64>> {
        self.get(key, required, |v| array(v)?.iter().map(|x| uint_value(x, min, u64::MAX)).collect())
    }

    fn point(&mut self, key: &str, required: bool, dim: usize) -> Option<Point> {
        self.get(key, required, |v| point_value(v, dim))
    }

    fn points(&mut self, key: &str, required: bool, dim: usize) -> Option<Vec<Point>> {
        self.get(key, required, |v| array(v)?.iter().map(|p| point_value(p, dim)).collect())
    }

    fn reject_unknown(&mut self) {
        let unknown: Vec<String> = self.map.keys().filter(|k| !self.used.contains(*k)).cloned().collect();
        for k in unknown {
            self.fail(&k, "unknown key");
        }
    }
}

fn array(v: &Value) -> Result<&Vec<Value>, String> {
    v.as_array().ok_or_else(|| "expected an array".to_string())
}

fn float_value(v: &Value) -> Result<f64, String> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        _ => return Err("expected a number".into()),
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} is not finite"))
    }
}

fn uint_value(v: &Value, min: u64, max: u64) -> Result<u64, String> {
    let i = v.as_integer().ok_or_else(|| "expected an integer".to_string())?;
    match u64::try_from(i) {
        Ok(u) if u >= min && u <= max => Ok(u),
        _ if max == u64::MAX => Err(format!("{i} must be an integer >= {min}")),
        _ => Err(format!("{i} outside the admissible range [{min}, {max}]")),
    }
}

fn point_value(v: &Value, dim: usize) -> Result<Point, String> {
    let coords: Vec<f64> = array(v)?.iter().map(float_value).collect::<Result<_, _>>()?;
    if coords.len() != dim {
        return Err(format!("expected {dim} coordinates, got {}", coords.len()));
    }
    Point::new(&coords).map_err(|e| e.to_string())
}

fn read(rd: &mut Reader, echo: BTreeMap<String, Value>) -> Option<ScenarioConfig> {
    let scenario_id = rd.string("scenario_id", false).unwrap_or_else(|| "scenario".into());
    let dim = rd.uint("d", true, 1, 3).map(|d| d as usize);
    let grain_dim = rd.uint("n", true, 0, 2).map(|n| n as usize);
    if let (Some(d), Some(n)) = (dim, grain_dim) {
        if n >= d {
            rd.fail(
                "n",
                format!("n = {n} with d = {d}: a lower-dimensional grain is required (0 <= n < d)"),
            );
        }
    }
    let seed = rd.uint("seed", false, 0, u64::MAX);
    let n = rd.uint("N", false, 1, u64::MAX);
    let n_grid = rd.uints("N_grid", false, 1);
    if let Some(g) = &n_grid {
        if g.is_empty() || g.windows(2).any(|w| w[0] >= w[1]) {
            rd.fail("N_grid", "must be a nonempty strictly increasing list");
        }
    }
    let replications = rd.uint("replications", false, 2, u64::MAX);
    let mark_draws = rd.uint("mark_draws", false, 1, u64::MAX).unwrap_or(DEFAULT_MARK_DRAWS);
    let output = rd.string("output", false).map(PathBuf::from);
    let minkowski = read_sweep(rd, "minkowski", &DEFAULT_MINKOWSKI_RADII);
    let oracle = read_sweep(rd, "oracle", &DEFAULT_ORACLE_RADII);

    let (Some(dim), Some(grain_dim)) = (dim, grain_dim) else {
        mark_rest_used(rd);
        return None;
    };
    let intensity = read_intensity(rd, dim);
    let marks = read_marks(rd, dim, grain_dim);
    let window = read_window(rd, dim);
    let bandwidth = read_bandwidth(rd, dim, grain_dim);
    let grid = read_grid(rd, dim);

    if let (Some(w), Some(g), Some(b)) = (&window, &grid, &bandwidth) {
        let r = match (n, &n_grid) {
            (_, Some(g)) if !g.is_empty() => Some(b.radius(g[0])),
            (Some(n), _) => Some(b.radius(n)),
            _ => None,
        };
        if let Some(r) = r {
            for p in &g.points {
                if !w.contains_ball(p, r) {
                    rd.fail(
                        "window",
                        format!("grid ball of radius {r} at {:?} is not inside the window", p.coords()),
                    );
                    break;
                }
            }
        }
    }
    if let (Some(w), Some(g)) = (&window, &grid) {
        if let Some(p) = g.points.iter().find(|p| !w.contains(p)) {
            rd.fail("grid", format!("point {:?} lies outside the window", p.coords()));
        }
    }

    let scenario = match (intensity, marks) {
        (Some(f), Some(q)) => match Scenario::new(f, q) {
            Ok(s) => Some(s),
            Err(e) => {
                rd.fail("marks", e);
                None
            }
        },
        _ => None,
    };
    if let Some(s) = &scenario {
        check_moments(rd, s);
    }
    Some(ScenarioConfig {
        scenario_id,
        dim,
        grain_dim,
        scenario: scenario?,
        seed,
        n,
        n_grid,
        replications,
        mark_draws,
        window,
        bandwidth: bandwidth?,
        grid,
        minkowski,
        oracle,
        output,
        echo,
    })
}

/// Marks every key as seen once the dimensions are unusable, so only the
/// dimension errors are reported.
fn mark_rest_used(rd: &mut Reader) {
    let keys: Vec<String> = rd.map.keys().cloned().collect();
    rd.used.extend(keys);
}

fn read_sweep(rd: &mut Reader, prefix: &str, default: &[f64]) -> RadiusSweep {
    let key = format!("{prefix}.r_grid");
    let r_grid = rd.floats(&key, false).unwrap_or_else(|| default.to_vec());
    if r_grid.iter().any(|r| !(*r > 0.0 && *r < 2.0)) {
        rd.fail(&key, "every radius must lie in (0, 2)");
    }
    let mc_points = rd
        .uint(&format!("{prefix}.mc_points"), false, 1, u64::MAX)
        .unwrap_or(DEFAULT_MC_POINTS);
    RadiusSweep { r_grid, mc_points }
}

fn read_intensity(rd: &mut Reader, dim: usize) -> Option<IntensityField> {
    let kind = rd.string("intensity.kind", true)?;
    let f = match kind.as_str() {
        "constant" => {
            let c = rd.float("intensity.value", true)?;
            if c < 0.0 {
                rd.fail("intensity.value", format!("{c} must be >= 0"));
                return None;
            }
            IntensityField::Constant(c)
        }
        "quadratic" => {
            let scale = rd.float("intensity.scale", false).unwrap_or(1.0);
            if scale < 0.0 {
                rd.fail("intensity.scale", format!("{scale} must be >= 0"));
                return None;
            }
            IntensityField::Quadratic { scale }
        }
        "affine" => {
            let offset = rd.float("intensity.offset", true);
            let slope = rd.point("intensity.slope", true, dim);
            IntensityField::Affine {
                offset: offset?,
                slope: slope?,
            }
        }
        "piecewise_constant" => {
            rd.used.extend(rd.map.keys().filter(|k| k.starts_with("intensity.")).cloned().collect::<Vec<_>>());
            rd.fail(
                "intensity.kind",
                "piecewise_constant jumps on box faces, which are not H^n-negligible; use a continuous intensity",
            );
            return None;
        }
        other => {
            rd.fail(
                "intensity.kind",
                format!("unknown kind {other:?} (expected constant, quadratic or affine)"),
            );
            return None;
        }
    };
    Some(f)
}

fn read_marks(rd: &mut Reader, dim: usize, grain_dim: usize) -> Option<MarkDistribution> {
    let kind = rd.string("marks.kind", true)?;
    let q = match kind.as_str() {
        "segment_law" => {
            let length = read_length(rd);
            let orientation = match rd.string("marks.orientation.kind", false).as_deref() {
                None | Some("uniform") => Some(OrientationLaw::Uniform),
                Some("fixed") => rd.point("marks.orientation.direction", true, dim).map(OrientationLaw::Fixed),
                Some(other) => {
                    rd.fail("marks.orientation.kind", format!("unknown kind {other:?} (expected uniform or fixed)"));
                    None
                }
            };
            match MarkDistribution::segment_law(dim, length?, orientation?) {
                Ok(q) => q,
                Err(e) => {
                    rd.fail("marks.orientation.direction", e);
                    return None;
                }
            }
        }
        "deterministic" => MarkDistribution::deterministic(read_grain(rd, dim)?),
        other => {
            rd.fail(
                "marks.kind",
                format!("unknown kind {other:?} (expected segment_law or deterministic)"),
            );
            return None;
        }
    };
    if q.grain_dim() != grain_dim {
        rd.fail(
            "n",
            format!("n = {grain_dim} but the mark law produces grains of dimension {}", q.grain_dim()),
        );
        return None;
    }
    Some(q)
}

fn read_length(rd: &mut Reader) -> Option<LengthLaw> {
    let kind = rd.string("marks.length.kind", true)?;
    let law = match kind.as_str() {
        "fixed" => rd.float("marks.length.value", true).map(LengthLaw::fixed),
        "uniform" => {
            let lo = rd.float("marks.length.min", true);
            let hi = rd.float("marks.length.max", true);
            Some(LengthLaw::uniform(lo?, hi?))
        }
        "truncated_exponential" => {
            let rate = rd.float("marks.length.rate", true);
            let max = rd.float("marks.length.max", false);
            Some(LengthLaw::truncated_exponential(rate?, max))
        }
        other => {
            rd.fail(
                "marks.length.kind",
                format!("unknown kind {other:?} (expected fixed, uniform or truncated_exponential)"),
            );
            None
        }
    }?;
    match law {
        Ok(l) => Some(l),
        Err(e) => {
            rd.fail("marks.length", e);
            None
        }
    }
}

fn read_grain(rd: &mut Reader, dim: usize) -> Option<Grain> {
    let kind = rd.string("marks.grain.kind", true)?;
    let g = match kind.as_str() {
        "point" => Grain::point(dim),
        "segment" => {
            let length = rd.float("marks.grain.length", true);
            let direction = rd.point("marks.grain.direction", true, dim);
            Grain::segment(length?, direction?)
        }
        "polyline" => Grain::polyline(rd.points("marks.grain.vertices", true, dim)?),
        other => {
            rd.fail(
                "marks.grain.kind",
                format!("unknown kind {other:?} (expected point, segment or polyline)"),
            );
            return None;
        }
    };
    match g {
        Ok(g) => Some(g),
        Err(e) => {
            rd.fail("marks.grain", e);
            None
        }
    }
}

fn read_window(rd: &mut Reader, dim: usize) -> Option<Aabb> {
    if !rd.has("window.lo") && !rd.has("window.hi") {
        return None;
    }
    let lo = rd.point("window.lo", true, dim);
    let hi = rd.point("window.hi", true, dim);
    let (lo, hi) = (lo?, hi?);
    if (0..dim).any(|k| lo.get(k) >= hi.get(k)) {
        rd.fail("window", "must be nonempty (lo < hi on every axis)");
        return None;
    }
    Aabb::new(lo, hi).ok()
}

fn read_bandwidth(rd: &mut Reader, dim: usize, grain_dim: usize) -> Option<Bandwidth> {
    let fixed = rd.float("bandwidth.r", false);
    let c0 = rd.float("bandwidth.c0", false);
    let beta = rd.float("bandwidth.beta", false);
    if let Some(r) = fixed {
        if c0.is_some() || beta.is_some() {
            rd.fail("bandwidth", "give either r or the schedule (c0, beta), not both");
            return None;
        }
        if !(r > 0.0 && r < 2.0) {
            rd.fail("bandwidth.r", format!("{r} outside the admissible interval (0, 2)"));
            return None;
        }
        return Some(Bandwidth::Fixed(r));
    }
    if grain_dim >= dim {
        return None;
    }
    let codim = dim - grain_dim;
    let beta = beta.unwrap_or(1.0 / (codim as f64 + 2.0));
    match BandwidthSchedule::new(c0.unwrap_or(1.0), beta, dim, grain_dim) {
        Ok(s) => Some(Bandwidth::Schedule(s)),
        Err(e) => {
            let key = if c0.is_some_and(|c| !(c > 0.0)) {
                "bandwidth.c0"
            } else {
                "bandwidth.beta"
            };
            rd.fail(key, e);
            None
        }
    }
}

fn read_grid(rd: &mut Reader, dim: usize) -> Option<Grid> {
    let kind = rd.string("grid.kind", false)?;
    match kind.as_str() {
        "list" => rd.points("grid.points", true, dim).map(|points| Grid {
            points,
            cell_volume: None,
        }),
        "lattice" | "midpoints" => {
            let lo = rd.point("grid.lo", true, dim);
            let hi = rd.point("grid.hi", true, dim);
            let count = rd.uint("grid.count", true, 1, 10_000);
            let (lo, hi, count) = (lo?, hi?, count? as usize);
            if (0..dim).any(|k| lo.get(k) > hi.get(k)) {
                rd.fail("grid", "grid.lo must not exceed grid.hi");
                return None;
            }
            if kind == "lattice" && count < 2 && lo != hi {
                rd.fail("grid.count", "a lattice spanning a range needs at least 2 points per axis");
                return None;
            }
            Some(regular_grid(&lo, &hi, count, kind == "midpoints"))
        }
        other => {
            rd.fail("grid.kind", format!("unknown kind {other:?} (expected lattice, midpoints or list)"));
            None
        }
    }
}

/// Inclusive lattice or cell midpoints, first axis varying fastest.
pub fn regular_grid(lo: &Point, hi: &Point, count: usize, midpoints: bool) -> Grid {
    let dim = lo.dim();
    let axis = |k: usize, i: usize| {
        let (a, b) = (lo.get(k), hi.get(k));
        if midpoints {
            a + (b - a) * (i as f64 + 0.5) / count as f64
        } else if count == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (count - 1) as f64
        }
    };
    let total = count.pow(dim as u32);
    let points = (0..total)
        .map(|mut idx| {
            let mut c = [0.0; 3];
            for (k, ck) in c.iter_mut().enumerate().take(dim) {
                *ck = axis(k, idx % count);
                idx /= count;
            }
            Point::new(&c[..dim]).expect("finite grid coordinates")
        })
        .collect();
    let cell_volume = midpoints.then(|| (0..dim).map(|k| (hi.get(k) - lo.get(k)) / count as f64).product());
    Grid { points, cell_volume }
}

fn check_moments(rd: &mut Reader, s: &Scenario) {
    let m1 = s.marks.mean_hn();
    if !m1.is_finite() {
        rd.fail("marks", "E_Q[H^n(Z_0)] must be finite");
    }
    if matches!(s.intensity, IntensityField::Quadratic { .. }) {
        if let Some(m3) = s.marks.length_moment(3) {
            if !m3.is_finite() {
                rd.fail("marks", "quadratic intensity requires E[L^3] < infinity");
            }
        }
    }
}
