mod plot;

use clap::Parser;
use nonlocal_perimeter::asymptotics::{aniso_sobolev_sweep, AlphaDirection, aniso_sweep, sweep, SweepResult};
use nonlocal_perimeter::config::{Command, RunConfig};
use nonlocal_perimeter::constants::universal_constants;
use nonlocal_perimeter::perimeter::{coarea_rhs, f_nu, frac_perimeter, per_nu_mc_oracle, per_nu_set, McOptions};
use nonlocal_perimeter::Error;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "nuper", version, about = "Non-local perimeters and their limits")]
struct Cli {
    /// perimeter, sweep, aniso, coarea, oracle, constants or plot.
    /// Overrides `command` in the config.
    command: Option<String>,
    /// Input for `plot`: a series.csv file.
    input: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

struct Failure {
    code: u8,
    kind: String,
    section: Option<String>,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let section = match &e {
            Error::Config { section, .. } => Some(section.clone()),
            _ => None,
        };
        Failure { code: if e.is_validation() { 2 } else { 3 }, kind: e.kind().into(), section, message: e.to_string() }
    }
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "usage".into(), section: None, message: message.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure { code: 2, kind: "io".into(), section: None, message: format!("{}: {e}", path.display()) }
    }

    fn line(&self) -> String {
        let msg = self.message.replace(['\n', '\r'], " ").replace('"', "'");
        match &self.section {
            Some(s) => format!("nuper: error exit={} kind={} section={} message=\"{msg}\"", self.code, self.kind, s),
            None => format!("nuper: error exit={} kind={} message=\"{msg}\"", self.code, self.kind),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", Failure::usage(e.to_string().lines().next().unwrap_or("bad arguments")).line());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::usage(e.to_string()))?;
    }
    if cli.command.as_deref() == Some("plot") {
        let csv = cli.input.as_ref().ok_or_else(|| Failure::usage("plot needs a series.csv path"))?;
        let out = cli.out.clone().unwrap_or_else(|| csv.parent().map(Path::to_path_buf).unwrap_or_default());
        let path = plot::emit_plot_script(csv, &out)?;
        println!("{}", path.display());
        return Ok(());
    }
    if cli.input.is_some() {
        return Err(Failure::usage("unexpected positional argument"));
    }

    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::parse("")?,
    };
    for kv in &cli.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(c) = &cli.command {
        cfg.set_command(Command::parse(c)?);
    }
    let command = cfg.validate()?;
    let seed = cli.seed.or(cfg.seed()?).unwrap_or(0);
    let out = cli.out.clone().or_else(|| cfg.output_dir().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let hash = cfg.inputs_hash(seed);

    let (mut result, series) = execute(command, &cfg, seed)?;
    if let Value::Object(m) = &mut result {
        m.insert("command".into(), json!(command.name()));
        m.insert("inputs_hash".into(), json!(hash));
    }
    strip_runtime(&mut result);

    std::fs::create_dir_all(&out).map_err(|e| Failure::io(&out, e))?;
    let mut outputs = vec!["result.json"];
    write(&out.join("result.json"), &(serde_json::to_string_pretty(&result).expect("serializable") + "\n"))?;
    if let Some(s) = &series {
        write(&out.join("series.csv"), &series_csv(s)?)?;
        outputs.push("series.csv");
    }
    let manifest = json!({
        "command": command.name(),
        "inputs_hash": hash,
        "seed": seed,
        "config": cfg.canonical(),
        "threads": rayon::current_num_threads(),
        "outputs": outputs,
        "versions": {
            "nuper": env!("CARGO_PKG_VERSION"),
            "nonlocal_perimeter": nonlocal_perimeter::VERSION,
        },
        "timestamp": chrono::Utc::now().to_rfc3339(),
    });
    write(&out.join("manifest.json"), &(serde_json::to_string_pretty(&manifest).expect("serializable") + "\n"))?;
    println!("{}", out.join("result.json").display());
    Ok(())
}

fn execute(command: Command, cfg: &RunConfig, seed: u64) -> Result<(Value, Option<SweepResult>), Failure> {
    Ok(match command {
        Command::Constants => (js(&universal_constants(cfg.dim()?)), None),
        Command::Perimeter => {
            let set = cfg.set()?;
            let m = cfg.measure(set.dim())?;
            let q = cfg.quadrature()?;
            let p = per_nu_set(&set, &m, &q)?;
            match cfg.fractional_alpha()? {
                // report P_α = (κ/α) Per_ν; Per_ν is kept alongside
                Some(a) => {
                    let mut v = js(&frac_perimeter(&set, a, &q)?);
                    v["per_nu"] = json!(p.value);
                    (v, None)
                }
                None => (js(&p), None),
            }
        }
        Command::Oracle => {
            let set = cfg.set()?;
            let m = cfg.measure(set.dim())?;
            let q = cfg.quadrature()?;
            let mc = per_nu_mc_oracle(&set, &m, McOptions { samples: cfg.samples()?, seed })?;
            let quad = per_nu_set(&set, &m, &q)?;
            let sigma = (mc.err * mc.err + quad.err * quad.err).sqrt();
            let z = if sigma > 0.0 { (mc.value - quad.value).abs() / sigma } else { 0.0 };
            (json!({ "quadrature": js(&quad), "monte_carlo": js(&mc), "z_score": z, "agree_3_sigma": z <= 3.0 }), None)
        }
        Command::Coarea => {
            let u = cfg.grid_function()?;
            let m = cfg.measure(u.dim())?;
            let q = cfg.quadrature()?;
            let lhs = f_nu(&u, &m, &q)?;
            let rhs = coarea_rhs(&u, &m, &q)?;
            let gap = (lhs.value - rhs.value).abs();
            (json!({ "f_nu": js(&lhs), "coarea": js(&rhs), "gap": gap, "rel_gap": gap / lhs.value.abs().max(f64::MIN_POSITIVE) }), None)
        }
        Command::Sweep => {
            let (fam, payload, regime, grid) = cfg.sweep_spec()?;
            let r = sweep(&fam, &payload, regime, &grid, &cfg.sweep_options()?)?;
            (js(&r), Some(r))
        }
        Command::Aniso => {
            let opts = cfg.sweep_options()?;
            let r = if cfg.set_is_grid() {
                let u = cfg.grid_function()?;
                let body = cfg.body(u.dim())?;
                let grid = cfg.alpha_grid(AlphaDirection::AlphaUp)?;
                aniso_sobolev_sweep(&u, &body, &grid, &opts)?
            } else {
                let (body, set, dir, grid) = cfg.aniso_spec()?;
                aniso_sweep(&body, &set, dir, &grid, &opts)?
            };
            (js(&r), Some(r))
        }
    })
}

fn js<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// result.json must not depend on wall-clock time.
fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_ms");
            m.values_mut().for_each(strip_runtime);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}

fn series_csv(r: &SweepResult) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::usage(e.to_string());
    w.write_record(plot::HEADER).map_err(fail)?;
    for row in r.rows.iter().filter(|r| r.ok()) {
        w.write_record([
            row.param.to_string(),
            row.c_eps.to_string(),
            row.per_nu.to_string(),
            row.normalized.to_string(),
            row.target.to_string(),
            row.residual.to_string(),
            row.err_est.to_string(),
            format!("{:.3}", row.runtime_ms),
            r.regime.name().to_string(),
        ])
        .map_err(fail)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Failure::usage(e.to_string()))?).expect("utf-8"))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}
