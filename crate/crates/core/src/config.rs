//! Strict INI run configuration: sections `[set]`, `[measure]`, `[body]`,
//! `[sweep]`, `[quadrature]`, `[output]`, plus top-level `command`, `d`
//! and `seed`. Unknown sections or keys and repeated keys are errors.

use crate::asymptotics::{default_alpha_grid, geometric_grid, AlphaDirection, Payload, Regime, SweepOptions};
use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geometry::{AnalyticShape, IntervalUnion, SetGeometry, VoxelSet};
use crate::measures::{Kernel, KernelKind, MeasureSpec, Normalization, RadialProfile, ScalingFamily, ScalingRule, SphericalMeasure};
use crate::perimeter::{GridFunction, QuadratureSpec};
use crate::sphere::SphereGrid;
use ini::Ini;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

const GENERAL: &str = "";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Perimeter,
    Sweep,
    Aniso,
    Coarea,
    Oracle,
    Constants,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "perimeter" => Command::Perimeter,
            "sweep" => Command::Sweep,
            "aniso" => Command::Aniso,
            "coarea" => Command::Coarea,
            "oracle" => Command::Oracle,
            "constants" => Command::Constants,
            _ => return Err(Error::config(GENERAL, format!("unknown command '{s}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Perimeter => "perimeter",
            Command::Sweep => "sweep",
            Command::Aniso => "aniso",
            Command::Coarea => "coarea",
            Command::Oracle => "oracle",
            Command::Constants => "constants",
        }
    }

    fn required(&self) -> &'static [&'static str] {
        match self {
            Command::Perimeter | Command::Oracle => &["set", "measure"],
            Command::Sweep => &["set", "measure", "sweep"],
            Command::Aniso => &["set", "body", "sweep"],
            Command::Coarea => &["set", "measure"],
            Command::Constants => &[],
        }
    }
}

fn allowed(section: &str, kind: Option<&str>) -> &'static [&'static str] {
    match (section, kind) {
        (GENERAL, _) => &["command", "d", "seed"],
        ("set", Some("interval")) => &["type", "a", "b", "raster_h"],
        ("set", Some("intervals")) => &["type", "intervals", "raster_h"],
        ("set", Some("ball")) => &["type", "center", "radius", "raster_h"],
        ("set", Some("box")) => &["type", "lo", "hi", "raster_h"],
        ("set", Some("polygon")) => &["type", "vertices", "raster_h"],
        ("set", Some("voxel")) => &["type", "path"],
        ("set", Some("dyadic")) => &["type", "n_max"],
        ("set", Some("grid")) => &["type", "dims", "h", "origin", "values"],
        ("measure", Some("fractional")) => &["type", "alpha"],
        ("measure", Some("stable")) => &["type", "alpha", "prefactor", "sphere_atoms"],
        ("measure", Some("radial_atoms")) => &["type", "atoms", "sphere_atoms"],
        ("measure", Some("kernel")) => &["type", "kernel", "length", "amplitude", "power", "axis"],
        ("measure", Some("aniso_stable")) => &["type", "alpha"],
        ("body", Some("ball")) => &["type", "radius"],
        ("body", Some("box" | "cross_polytope")) => &["type", "half_widths"],
        ("body", Some("ellipsoid")) => &["type", "axes"],
        ("body", Some("lp")) => &["type", "p", "radius"],
        ("body", Some("polygon")) => &["type", "vertices"],
        ("sweep", _) => &[
            "family",
            "alpha_weighted",
            "normalization",
            "r",
            "regime",
            "grid",
            "start",
            "end",
            "points",
            "tolerance",
            "direction",
            "mu_atoms",
            "h0",
        ],
        ("quadrature", _) => &["rel_tol", "r_min", "r_max", "near_radius", "grid_h", "nodes_per_decade", "circle", "polar", "azimuth", "samples"],
        ("output", _) => &["dir"],
        _ => &[],
    }
}

const SECTIONS: [&str; 7] = [GENERAL, "set", "measure", "body", "sweep", "quadrature", "output"];

/// Parsed configuration with overrides applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn cfg_err(section: &str, msg: impl Into<String>) -> Error {
    Error::config(if section.is_empty() { "general" } else { section }, msg)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| cfg_err(GENERAL, format!("syntax: {e}")))?;
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut seen = std::collections::BTreeSet::new();
        for (name, props) in ini.iter() {
            let name = name.unwrap_or(GENERAL).to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(cfg_err(&name, "unknown section"));
            }
            if !seen.insert(name.clone()) && !(name == GENERAL && props.is_empty()) {
                return Err(cfg_err(&name, "section appears twice"));
            }
            let entry = sections.entry(name.clone()).or_default();
            for (k, v) in props.iter() {
                if entry.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(cfg_err(&name, format!("key '{k}' given twice")));
                }
            }
        }
        sections.retain(|k, v| !(k.is_empty() && v.is_empty()));
        let c = RunConfig { sections };
        c.check_keys()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `section.key=value`, or `key=value` for top-level keys.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv.split_once('=').ok_or_else(|| cfg_err(GENERAL, format!("override '{kv}' is not key=value")))?;
        let (sec, key) = match k.trim().split_once('.') {
            Some((s, k)) => (s.to_string(), k.to_string()),
            None => (GENERAL.to_string(), k.trim().to_string()),
        };
        if !SECTIONS.contains(&sec.as_str()) {
            return Err(cfg_err(&sec, "unknown section in override"));
        }
        self.sections.entry(sec).or_default().insert(key, v.trim().to_string());
        self.check_keys()
    }

    fn check_keys(&self) -> Result<()> {
        for (sec, props) in &self.sections {
            let kind = props.get("type").map(|s| s.as_str());
            let ok = allowed(sec, kind);
            if ok.is_empty() {
                return Err(cfg_err(sec, match kind {
                    Some(t) => format!("unknown type '{t}'"),
                    None => "missing key 'type'".to_string(),
                }));
            }
            for k in props.keys() {
                if !ok.contains(&k.as_str()) {
                    return Err(cfg_err(sec, format!("unknown key '{k}'")));
                }
            }
        }
        Ok(())
    }

    /// Sorted `section.key=value` lines; the basis of the inputs hash.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (sec, props) in &self.sections {
            for (k, v) in props {
                if sec.is_empty() {
                    out.push_str(&format!("{k}={v}\n"));
                } else {
                    out.push_str(&format!("{sec}.{k}={v}\n"));
                }
            }
        }
        out
    }

    pub fn inputs_hash(&self, seed: u64) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        h.update(format!("seed={seed}\n").as_bytes());
        hex::encode(h.finalize())
    }

    fn get(&self, sec: &str, key: &str) -> Option<&str> {
        self.sections.get(sec).and_then(|p| p.get(key)).map(|s| s.as_str())
    }

    fn has(&self, sec: &str) -> bool {
        self.sections.contains_key(sec)
    }

    fn req(&self, sec: &str, key: &str) -> Result<&str> {
        self.get(sec, key).ok_or_else(|| cfg_err(sec, format!("missing key '{key}'")))
    }

    fn num(&self, sec: &str, key: &str) -> Result<Option<f64>> {
        match self.get(sec, key) {
            None => Ok(None),
            Some(v) => parse_num(v).map(Some).map_err(|m| cfg_err(sec, format!("{key}: {m}"))),
        }
    }

    fn req_num(&self, sec: &str, key: &str) -> Result<f64> {
        self.num(sec, key)?.ok_or_else(|| cfg_err(sec, format!("missing key '{key}'")))
    }

    fn list(&self, sec: &str, key: &str) -> Result<Vec<f64>> {
        parse_list(self.req(sec, key)?).map_err(|m| cfg_err(sec, format!("{key}: {m}")))
    }

    fn rows(&self, sec: &str, key: &str) -> Result<Vec<Vec<f64>>> {
        self.req(sec, key)?
            .split(';')
            .filter(|r| !r.trim().is_empty())
            .map(|r| parse_list(&r.replace(' ', ",")).map_err(|m| cfg_err(sec, format!("{key}: {m}"))))
            .collect()
    }

    pub fn command(&self) -> Result<Command> {
        Command::parse(self.get(GENERAL, "command").ok_or_else(|| cfg_err(GENERAL, "missing key 'command'"))?)
    }

    pub fn set_command(&mut self, c: Command) {
        self.sections.entry(GENERAL.to_string()).or_default().insert("command".into(), c.name().into());
    }

    /// Checks that the sections the command reads are present.
    pub fn validate(&self) -> Result<Command> {
        let c = self.command()?;
        for s in c.required() {
            if !self.has(s) {
                return Err(cfg_err(s, format!("section required by command '{}' is missing", c.name())));
            }
        }
        if c == Command::Sweep && self.get("measure", "type") == Some("aniso_stable") && !self.has("body") {
            return Err(cfg_err("body", "aniso_stable measure needs a [body] section"));
        }
        Ok(c)
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        match self.get(GENERAL, "seed") {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| cfg_err(GENERAL, format!("seed: '{s}' is not an unsigned integer"))),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        match self.num(GENERAL, "d")? {
            Some(d) if d.fract() == 0.0 && (1.0..=3.0).contains(&d) => Ok(d as usize),
            Some(d) => Err(cfg_err(GENERAL, format!("d must be 1, 2 or 3, got {d}"))),
            None if self.has("set") && self.get("set", "type") != Some("grid") => Ok(self.set()?.dim()),
            None if self.has("set") => Ok(self.grid_function()?.dim()),
            None => Err(cfg_err(GENERAL, "missing key 'd'")),
        }
    }

    pub fn output_dir(&self) -> Option<&str> {
        self.get("output", "dir")
    }

    pub fn set(&self) -> Result<SetGeometry> {
        let s = "set";
        let wrap = |e: Error| match e {
            Error::InvalidInput(m) | Error::Unsupported(m) => cfg_err(s, m),
            other => other,
        };
        let kind = self.req(s, "type")?;
        let set = match kind {
            "interval" => SetGeometry::Intervals(IntervalUnion::single(self.req_num(s, "a")?, self.req_num(s, "b")?).map_err(wrap)?),
            "intervals" => {
                let mut v = Vec::new();
                for part in self.req(s, "intervals")?.split(',') {
                    let (a, b) = part.split_once(':').ok_or_else(|| cfg_err(s, "intervals: expected a:b, c:d, ..."))?;
                    let a = parse_num(a).map_err(|m| cfg_err(s, m))?;
                    let b = parse_num(b).map_err(|m| cfg_err(s, m))?;
                    v.push((a, b));
                }
                SetGeometry::Intervals(IntervalUnion::new(v).map_err(wrap)?)
            }
            "ball" => {
                let c = self.list(s, "center")?;
                let r = self.req_num(s, "radius")?;
                if c.len() == 1 {
                    SetGeometry::Intervals(IntervalUnion::single(c[0] - r, c[0] + r).map_err(wrap)?)
                } else {
                    SetGeometry::Shape(AnalyticShape::ball(c, r).map_err(wrap)?)
                }
            }
            "box" => {
                let (lo, hi) = (self.list(s, "lo")?, self.list(s, "hi")?);
                if lo.len() == 1 && hi.len() == 1 {
                    SetGeometry::Intervals(IntervalUnion::single(lo[0], hi[0]).map_err(wrap)?)
                } else {
                    SetGeometry::Shape(AnalyticShape::boxed(lo, hi).map_err(wrap)?)
                }
            }
            "polygon" => {
                let rows = self.rows(s, "vertices")?;
                let mut v = Vec::new();
                for r in rows {
                    if r.len() != 2 {
                        return Err(cfg_err(s, "vertices: expected 'x y; x y; ...'"));
                    }
                    v.push([r[0], r[1]]);
                }
                SetGeometry::Shape(AnalyticShape::polygon(v).map_err(wrap)?)
            }
            "voxel" => SetGeometry::Voxels(VoxelSet::read(Path::new(self.req(s, "path")?))?),
            "dyadic" => {
                let n = self.num(s, "n_max")?.unwrap_or(crate::perimeter::DYADIC_N_MAX as f64);
                if !(n >= 1.0 && n.fract() == 0.0) {
                    return Err(cfg_err(s, "n_max must be a positive integer"));
                }
                SetGeometry::Intervals(IntervalUnion::dyadic(n as usize))
            }
            "grid" => return Err(cfg_err(s, "a grid function is not a set; use it with the coarea command")),
            other => return Err(cfg_err(s, format!("unknown type '{other}'"))),
        };
        match (self.num(s, "raster_h")?, &set) {
            (Some(h), SetGeometry::Shape(sh)) => Ok(SetGeometry::Voxels(VoxelSet::rasterize(sh, h)?)),
            (Some(h), SetGeometry::Intervals(e)) => Ok(SetGeometry::Voxels(VoxelSet::rasterize_intervals(e, h)?)),
            _ => Ok(set),
        }
    }

    /// `[set]` as a function: `type = grid` gives it directly, any other set its indicator.
    pub fn grid_function(&self) -> Result<GridFunction> {
        let s = "set";
        if self.get(s, "type") != Some("grid") {
            let v = match self.set()? {
                SetGeometry::Voxels(v) => v,
                SetGeometry::Shape(sh) => VoxelSet::rasterize(&sh, self.quadrature()?.grid_h)?,
                SetGeometry::Intervals(e) => VoxelSet::rasterize_intervals(&e, self.quadrature()?.grid_h)?,
            };
            return Ok(GridFunction::indicator(&v, 1.0));
        }
        let dims: Vec<usize> = self.list(s, "dims")?.into_iter().map(|x| x as usize).collect();
        let d = dims.len();
        let origin = match self.get(s, "origin") {
            Some(_) => self.list(s, "origin")?,
            None => vec![0.0; d],
        };
        GridFunction::new(d, &dims, self.req_num(s, "h")?, &origin, self.list(s, "values")?).map_err(|e| match e {
            Error::InvalidInput(m) => cfg_err(s, m),
            other => other,
        })
    }

    fn sphere_atoms(&self, sec: &str, key: &str, d: usize) -> Result<Option<SphericalMeasure>> {
        if self.get(sec, key).is_none() {
            return Ok(None);
        }
        let mut atoms = Vec::new();
        for r in self.rows(sec, key)? {
            if r.len() != d + 1 {
                return Err(cfg_err(sec, format!("{key}: each atom is d coordinates and a weight")));
            }
            atoms.push((r[..d].to_vec(), r[d]));
        }
        SphericalMeasure::atoms(d, atoms).map(Some).map_err(|e| cfg_err(sec, e.to_string()))
    }

    pub fn body(&self, d: usize) -> Result<ConvexBody> {
        let s = "body";
        let wrap = |e: Error| cfg_err(s, e.to_string());
        let body = match self.req(s, "type")? {
            "ball" => ConvexBody::ellipsoid(vec![self.num(s, "radius")?.unwrap_or(1.0); d]),
            "box" => ConvexBody::boxed(self.list(s, "half_widths")?),
            "cross_polytope" => ConvexBody::cross_polytope(self.list(s, "half_widths")?),
            "ellipsoid" => ConvexBody::ellipsoid(self.list(s, "axes")?),
            "lp" => ConvexBody::lp_ball(d, self.req_num(s, "p")?, self.num(s, "radius")?.unwrap_or(1.0)),
            "polygon" => {
                let mut v = Vec::new();
                for r in self.rows(s, "vertices")? {
                    if r.len() != 2 {
                        return Err(cfg_err(s, "vertices: expected 'x y; x y; ...'"));
                    }
                    v.push([r[0], r[1]]);
                }
                ConvexBody::polygon(v)
            }
            other => return Err(cfg_err(s, format!("unknown type '{other}'"))),
        }
        .map_err(wrap)?;
        if body.dim() != d {
            return Err(cfg_err(s, format!("body has dimension {}, set has dimension {d}", body.dim())));
        }
        Ok(body)
    }

    pub fn kernel(&self, d: usize) -> Result<Kernel> {
        let s = "measure";
        let wrap = |e: Error| cfg_err(s, e.to_string());
        let kind = match self.req(s, "kernel")? {
            "gaussian" => KernelKind::Gaussian,
            "indicator" => KernelKind::IndicatorBall,
            "inverse_power" => KernelKind::InversePowerTruncated { power: self.req_num(s, "power")? },
            "half_plane_cone" => {
                let a = self.list(s, "axis")?;
                if a.len() != d {
                    return Err(cfg_err(s, "axis must have d coordinates"));
                }
                let mut axis = [0.0; 3];
                axis[..d].copy_from_slice(&a);
                KernelKind::HalfPlaneCone { axis }
            }
            other => return Err(cfg_err(s, format!("unknown kernel '{other}'"))),
        };
        let mut k = Kernel::new(d, kind).map_err(wrap)?;
        if let Some(l) = self.num(s, "length")? {
            k = k.with_length(l).map_err(wrap)?;
        }
        if let Some(a) = self.num(s, "amplitude")? {
            k = k.with_amplitude(a).map_err(wrap)?;
        }
        Ok(k)
    }

    pub fn measure(&self, d: usize) -> Result<MeasureSpec> {
        let s = "measure";
        let wrap = |e: Error| cfg_err(s, e.to_string());
        let sphere = |this: &Self| -> Result<SphericalMeasure> {
            match this.sphere_atoms(s, "sphere_atoms", d)? {
                Some(m) => Ok(m),
                None => SphericalMeasure::uniform(d),
            }
        };
        match self.req(s, "type")? {
            "fractional" => MeasureSpec::fractional(d, self.req_num(s, "alpha")?).map_err(wrap),
            "stable" => {
                let rho = RadialProfile::power_with(self.req_num(s, "alpha")?, self.num(s, "prefactor")?.unwrap_or(1.0)).map_err(wrap)?;
                Ok(MeasureSpec::radial_spherical(rho, sphere(self)?))
            }
            "radial_atoms" => {
                let mut atoms = Vec::new();
                for r in self.rows(s, "atoms")? {
                    if r.len() != 2 {
                        return Err(cfg_err(s, "atoms: expected 'r w; r w; ...'"));
                    }
                    atoms.push((r[0], r[1]));
                }
                Ok(MeasureSpec::radial_spherical(RadialProfile::atoms(atoms).map_err(wrap)?, sphere(self)?))
            }
            "kernel" => Ok(MeasureSpec::kernel(self.kernel(d)?)),
            "aniso_stable" => MeasureSpec::anisotropic_stable(self.body(d)?, self.req_num(s, "alpha")?).map_err(wrap),
            other => Err(cfg_err(s, format!("unknown type '{other}'"))),
        }
    }

    /// α when `[measure]` is the fractional kernel.
    pub fn fractional_alpha(&self) -> Result<Option<f64>> {
        if self.get("measure", "type") == Some("fractional") {
            self.num("measure", "alpha")
        } else {
            Ok(None)
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let s = "quadrature";
        let mut q = QuadratureSpec::default();
        if let Some(v) = self.num(s, "rel_tol")? {
            q.rel_tol = v;
        }
        if let Some(v) = self.num(s, "r_min")? {
            q.r_min = v;
        }
        if let Some(v) = self.num(s, "r_max")? {
            q.r_max = v;
        }
        if let Some(v) = self.num(s, "near_radius")? {
            q.near_radius = v;
        }
        if let Some(v) = self.num(s, "grid_h")? {
            q.grid_h = v;
        }
        let count = |key: &str| -> Result<Option<usize>> {
            match self.num(s, key)? {
                Some(v) if v >= 1.0 && v.fract() == 0.0 => Ok(Some(v as usize)),
                Some(v) if key == "nodes_per_decade" && v == 0.0 => Ok(Some(0)),
                Some(v) => Err(cfg_err(s, format!("{key} must be a positive integer, got {v}"))),
                None => Ok(None),
            }
        };
        if let Some(v) = count("nodes_per_decade")? {
            q.nodes_per_decade = v;
        }
        let mut g: SphereGrid = q.sphere;
        if let Some(v) = count("circle")? {
            g.circle = v;
        }
        if let Some(v) = count("polar")? {
            g.polar = v;
        }
        if let Some(v) = count("azimuth")? {
            g.azimuth = v;
        }
        q.sphere = g;
        q.validate().map_err(|e| cfg_err(s, e.to_string()))?;
        Ok(q)
    }

    pub fn samples(&self) -> Result<usize> {
        match self.num("quadrature", "samples")? {
            None => Ok(1_000_000),
            Some(v) if v >= 2.0 && v.fract() == 0.0 => Ok(v as usize),
            Some(v) => Err(cfg_err("quadrature", format!("samples must be an integer >= 2, got {v}"))),
        }
    }

    fn grid(&self, direction: Option<AlphaDirection>) -> Result<Vec<f64>> {
        let s = "sweep";
        if self.get(s, "grid").is_some() {
            return self.list(s, "grid");
        }
        match (self.num(s, "start")?, self.num(s, "end")?) {
            (Some(a), Some(b)) => {
                let n = self.num(s, "points")?.unwrap_or(6.0);
                if !(n >= 1.0 && n.fract() == 0.0) {
                    return Err(cfg_err(s, "points must be a positive integer"));
                }
                if !(a > 0.0 && b > 0.0) {
                    return Err(cfg_err(s, "start and end must be positive"));
                }
                Ok(geometric_grid(a, b, n as usize))
            }
            (None, None) => match direction {
                Some(d) => Ok(default_alpha_grid(d)),
                None => Ok(geometric_grid(0.1, 1e-3, 6)),
            },
            _ => Err(cfg_err(s, "give both start and end, or grid")),
        }
    }

    pub fn sweep_options(&self) -> Result<SweepOptions> {
        let mut o = SweepOptions { quad: self.quadrature()?, ..Default::default() };
        if let Some(t) = self.num("sweep", "tolerance")? {
            if !(t > 0.0) {
                return Err(cfg_err("sweep", "tolerance must be positive"));
            }
            o.tolerance = t;
        }
        if let Some(h) = self.num("sweep", "h0")? {
            o.h0 = h;
        }
        Ok(o)
    }

    pub fn direction(&self) -> Result<Option<AlphaDirection>> {
        match self.get("sweep", "direction") {
            None => Ok(None),
            Some("alpha_up") => Ok(Some(AlphaDirection::AlphaUp)),
            Some("alpha_down") => Ok(Some(AlphaDirection::AlphaDown)),
            Some(o) => Err(cfg_err("sweep", format!("direction must be alpha_up or alpha_down, got '{o}'"))),
        }
    }

    /// Family, payload, regime and grid for the `sweep` command.
    pub fn sweep_spec(&self) -> Result<(ScalingFamily, Payload, Regime, Vec<f64>)> {
        let s = "sweep";
        let set = self.set()?;
        let d = set.dim();
        let base = self.measure(d)?;
        let rule = match self.req(s, "family")? {
            "alpha" => ScalingRule::AlphaFamily { alpha_weighted: parse_bool(self.get(s, "alpha_weighted").unwrap_or("false")).map_err(|m| cfg_err(s, m))? },
            "kernel_shrink" => ScalingRule::KernelShrink,
            "set_shrink" => ScalingRule::SetShrink,
            "kernel_stretch" => ScalingRule::KernelStretch,
            other => return Err(cfg_err(s, format!("unknown family '{other}'"))),
        };
        let r = self.num(s, "r")?.unwrap_or(1.0);
        let norm = match self.req(s, "normalization")? {
            "cap_at_r" => Normalization::CapAtR(r),
            "cap_at_one" => Normalization::CapAtOne(r),
            "total_mass" => Normalization::TotalMass,
            "base_tail" => Normalization::BaseTail,
            "alpha_up" => Normalization::AlphaUp,
            "alpha_down" => Normalization::AlphaDown,
            other => return Err(cfg_err(s, format!("unknown normalization '{other}'"))),
        };
        let fam = ScalingFamily::new(base, rule, norm).map_err(|e| cfg_err(s, e.to_string()))?;
        let regime = Regime::parse(self.req(s, "regime")?).map_err(|e| cfg_err(s, e.to_string()))?;
        let mut payload = Payload::new(set);
        if self.has("body") {
            payload = payload.with_body(self.body(d)?);
        }
        if let Some(mu) = self.sphere_atoms(s, "mu_atoms", d)? {
            payload = payload.with_mu(mu);
        }
        let dir = match norm {
            Normalization::AlphaUp => Some(AlphaDirection::AlphaUp),
            Normalization::AlphaDown => Some(AlphaDirection::AlphaDown),
            _ if matches!(rule, ScalingRule::AlphaFamily { .. }) => Some(if regime.lambda_limit() > 0.5 { AlphaDirection::AlphaDown } else { AlphaDirection::AlphaUp }),
            _ => None,
        };
        Ok((fam, payload, regime, self.grid(dir)?))
    }

    pub fn set_is_grid(&self) -> bool {
        self.get("set", "type") == Some("grid")
    }

    /// `[sweep]` grid, with the default α grid for `direction` when none is given.
    pub fn alpha_grid(&self, direction: AlphaDirection) -> Result<Vec<f64>> {
        self.grid(Some(direction))
    }

    /// Body, set, direction and grid for the `aniso` command.
    pub fn aniso_spec(&self) -> Result<(ConvexBody, SetGeometry, AlphaDirection, Vec<f64>)> {
        let set = self.set()?;
        let body = self.body(set.dim())?;
        let dir = self.direction()?.ok_or_else(|| cfg_err("sweep", "missing key 'direction'"))?;
        Ok((body, set, dir, self.grid(Some(dir))?))
    }
}

fn parse_num(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let v = match t {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        _ => t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"))?,
    };
    if v.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(v)
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_num).collect()
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("'{s}' is not a boolean")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "command = perimeter\n[set]\ntype = interval\na = 0\nb = 1\n[measure]\ntype = fractional\nalpha = 0.5\n";

    #[test]
    fn parses_and_builds() {
        let c = RunConfig::parse(BASIC).unwrap();
        assert_eq!(c.validate().unwrap(), Command::Perimeter);
        assert_eq!(c.set().unwrap().volume(), 1.0);
        assert_eq!(c.measure(1).unwrap().dim(), 1);
    }

    #[test]
    fn strict_keys() {
        let e = RunConfig::parse(&BASIC.replace("alpha = 0.5", "α = 0.5")).unwrap_err();
        assert!(matches!(e, Error::Config { ref section, .. } if section == "measure"), "{e:?}");
        assert!(RunConfig::parse(&format!("{BASIC}[extra]\nx = 1\n")).is_err());
        assert!(RunConfig::parse(&BASIC.replace("b = 1", "b = 1\nb = 2")).is_err());
    }

    #[test]
    fn missing_section_named() {
        let c = RunConfig::parse("command = perimeter\n[set]\ntype = interval\na = 0\nb = 1\n").unwrap();
        match c.validate().unwrap_err() {
            Error::Config { section, .. } => assert_eq!(section, "measure"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn overrides_change_hash() {
        let mut c = RunConfig::parse(BASIC).unwrap();
        let h0 = c.inputs_hash(0);
        c.apply_override("measure.alpha=0.25").unwrap();
        assert_ne!(h0, c.inputs_hash(0));
        assert!(c.apply_override("measure.alfa=0.25").is_err());
    }
}
