//! holodyn: classify torus-leaf neighborhood types from a holonomy germ.
//!
//! One JSON document (or CSV where declared) goes to standard output;
//! diagnostics go to standard error. Exit status: 0 success, 1 usage or
//! parse error, 2 precondition refusal, 3 precision exhaustion.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use holodyn::classify::{decide, example43_grid, run_sweep};
use holodyn::config::{OutputFormat, RunConfig};
use holodyn::diophantine;
use holodyn::dynamics;
use holodyn::error::Error;
use holodyn::germ::{reduce, PolynomialGerm};
use holodyn::parse::{parse_germ, parse_multiplier};
use holodyn::surface::{surface_check, ExponentMode, SurfaceModel};

#[derive(Parser)]
#[command(name = "holodyn", version, about = "holonomy-germ neighborhood classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Working mantissa bits (>= 53).
    #[arg(long, global = true)]
    precision: Option<u32>,

    /// Base annulus modulus lambda in (0,1).
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Overlap half-width eps0 in (0, 1-lambda).
    #[arg(long, global = true)]
    eps0: Option<f64>,

    /// RNG seed for perturbation restarts and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Phi,
    Green,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the Theorem-1 branch and Corollary status of a germ.
    Classify {
        /// Polynomial germ, e.g. "2x+x^2".
        #[arg(long, allow_hyphen_values = true)]
        f: Option<String>,
        /// Multiplier shortcut; implies the family tau*x + x^2.
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
        /// Truncation order for series work.
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// Per-tau verdicts for the family tau*x + x^2 over a grid.
    Sweep {
        /// Off-circle samples (split between |tau| = 0.9 and 1.1).
        #[arg(long, default_value_t = 16)]
        off_circle: u32,
        /// Exact rational angles with denominators up to this bound.
        #[arg(long, default_value_t = 9)]
        rational_qmax: u64,
        /// Golden-shifted circle samples.
        #[arg(long, default_value_t = 23)]
        golden: u32,
        /// Depth of the constructed Cremer-type sample.
        #[arg(long, default_value_t = 3)]
        cremer_depth: u32,
    },
    /// Run the normal-form recursion and report the obstruction.
    NormalForm {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long = "N")]
        n: usize,
    },
    /// Rasterize the Green function over a window.
    GreenGrid {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        /// re_min,re_max,im_min,im_max
        #[arg(long, default_value = "-2,2,-1.5,1.5", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 64)]
        res: u32,
        /// Extra probe points "re+imi", evaluated off-grid.
        #[arg(long, allow_hyphen_values = true)]
        probe: Vec<String>,
        #[arg(long, default_value_t = 4096)]
        n_max: u32,
    },
    /// Periodic cycles of exact period m <= m_max in a disk.
    Cycles {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, default_value_t = 3)]
        m_max: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value_t = 1e9)]
        radius: f64,
    },
    /// Backward orbit accumulating on a repelling cycle.
    BackwardOrbit {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        xi0: String,
        #[arg(long, default_value_t = 40)]
        steps: u32,
        /// Cycle period; searched up to this bound for a repelling
        /// cycle admitting the seed.
        #[arg(long, default_value_t = 3)]
        period_max: u32,
    },
    /// Gluing and harmonicity certificates for the two-chart model.
    SurfaceCheck {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Phi)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: u32,
        /// Sampled |xi| bound in the overlap; defaults per mode.
        #[arg(long)]
        xi_radius: Option<f64>,
        #[arg(long = "N", default_value_t = 12)]
        n: usize,
        /// Declared gluing tolerance recorded in the report.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Small divisors and the two Corollary conditions for a multiplier.
    Diophantine {
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value_t = 10_000)]
        n_max: u64,
        #[arg(long, default_value_t = 30)]
        ell_max: u64,
        /// Growth bases A for the liminf condition.
        #[arg(long, default_values_t = vec![2.0])]
        a: Vec<f64>,
        /// Polynomial degree d entering d^l - 1.
        #[arg(long, default_value_t = 2)]
        d: u64,
        #[arg(long, default_value_t = 1_000_000)]
        q_max: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("holodyn: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match cli.precision {
        Some(p) => RunConfig::with_precision(p),
        None => RunConfig::default(),
    };
    if let Some(l) = cli.lambda {
        cfg.lambda = l;
    }
    if let Some(e) = cli.eps0 {
        cfg.eps0 = e;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.format = match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), Error> {
    match out {
        None => {
            println!("{body}");
            Ok(())
        }
        Some(path) => std::fs::write(path, format!("{body}\n"))
            .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display()))),
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::Precondition(format!("serialization failed: {e}")))
}

fn parse_point(s: &str, what: &str) -> Result<Complex64, Error> {
    let z = holodyn::parse::parse_coefficient(s, 64)
        .or_else(|_| holodyn::parse::parse_coefficient(&format!("({s})"), 64))
        .map_err(|_| Error::Parse(format!("bad {what} '{s}'")))?;
    Ok(holodyn::num::to_c64(&z))
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = build_config(&cli)?;
    let out = cli.out.clone();
    match cli.command {
        Command::Classify { ref f, ref tau, n } => {
            let mut cfg = cfg;
            if let Some(n) = n {
                cfg.truncation_order = n;
            }
            let germ = match (f, tau) {
                (Some(fs), None) => parse_germ(fs, cfg.precision_bits)?,
                (None, Some(ts)) => {
                    let m = parse_multiplier(ts, cfg.precision_bits, cfg.cremer_bit_cap)?;
                    PolynomialGerm::quadratic_family(m, cfg.precision_bits)?
                }
                _ => {
                    return Err(Error::Parse(
                        "classify needs exactly one of --f or --tau".into(),
                    ))
                }
            };
            let verdict = decide(&germ, &cfg)?;
            emit(&out, &json(&verdict)?)
        }
        Command::Sweep {
            off_circle,
            rational_qmax,
            golden,
            cremer_depth,
        } => {
            let grid = example43_grid(off_circle, rational_qmax, golden, cremer_depth, &cfg)?;
            let table = run_sweep(&grid, &cfg);
            match cfg.format {
                OutputFormat::Json => emit(&out, &json(&table)?),
                OutputFormat::Csv => emit(&out, table.to_csv().trim_end()),
            }
        }
        Command::NormalForm { ref f, n } => {
            let germ = parse_germ(f, cfg.precision_bits)?;
            let report = reduce(&germ, n, cfg.tolerances.elimination, &cfg.tolerances)?;
            emit(&out, &json(&report)?)
        }
        Command::GreenGrid {
            ref f,
            ref window,
            res,
            ref probe,
            n_max,
        } => {
            // Constant terms are allowed here: the polynomial is shifted
            // to an origin-fixing representative at a fixed point z*,
            // and g_p(z) = g_rep(z - z*) transports the values back.
            let affine = holodyn::parse::parse_affine_polynomial(f, cfg.precision_bits)?;
            let affine64: Vec<Complex64> =
                affine.iter().map(holodyn::num::to_c64).collect();
            let (germ, z_star) = dynamics::shift_to_fixed_point(&affine64)?;
            let parts: Vec<f64> = window
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad window '{window}'")))?;
            let [re0, re1, im0, im1] = parts[..] else {
                return Err(Error::Parse("window needs four numbers".into()));
            };
            if res < 2 {
                return Err(Error::Precondition("res must be >= 2".into()));
            }
            let mut rows = Vec::new();
            for iy in 0..res {
                for ix in 0..res {
                    let re = re0 + (re1 - re0) * ix as f64 / (res - 1) as f64;
                    let im = im0 + (im1 - im0) * iy as f64 / (res - 1) as f64;
                    let g =
                        dynamics::green(&germ, Complex64::new(re, im) - z_star, n_max)?;
                    rows.push(("grid", re, im, g));
                }
            }
            for p in probe {
                let z = parse_point(p, "probe point")?;
                let g = dynamics::green(&germ, z - z_star, n_max)?;
                rows.push(("probe", z.re, z.im, g));
            }
            match cfg.format {
                OutputFormat::Csv => {
                    let mut body =
                        String::from("kind,re,im,g,escaped_iter,certified_error,indeterminate\n");
                    for (kind, re, im, g) in &rows {
                        body.push_str(&format!(
                            "{kind},{re},{im},{},{},{},{}\n",
                            g.value,
                            g.escape_iterations.map(|v| v.to_string()).unwrap_or_default(),
                            g.certified_error,
                            g.indeterminate
                        ));
                    }
                    emit(&out, body.trim_end())
                }
                OutputFormat::Json => {
                    #[derive(serde::Serialize)]
                    struct Row {
                        kind: &'static str,
                        re: f64,
                        im: f64,
                        g: f64,
                        escaped_iter: Option<u32>,
                        certified_error: f64,
                        indeterminate: bool,
                    }
                    let body: Vec<Row> = rows
                        .into_iter()
                        .map(|(kind, re, im, g)| Row {
                            kind,
                            re,
                            im,
                            g: g.value,
                            escaped_iter: g.escape_iterations,
                            certified_error: g.certified_error,
                            indeterminate: g.indeterminate,
                        })
                        .collect();
                    emit(&out, &json(&body)?)
                }
            }
        }
        Command::Cycles {
            ref f,
            m_max,
            ref center,
            radius,
        } => {
            let germ = parse_germ(f, cfg.precision_bits)?;
            let c = parse_point(center, "center")?;
            let cycles = dynamics::periodic_cycles(
                &germ,
                m_max,
                c,
                radius,
                cfg.cycle_degree_cap,
                cfg.tolerances.root,
                cfg.tolerances.multiplier_band,
                cfg.seed,
            )?;
            emit(&out, &json(&cycles)?)
        }
        Command::BackwardOrbit {
            ref f,
            ref xi0,
            steps,
            period_max,
        } => {
            let germ = parse_germ(f, cfg.precision_bits)?;
            let seed_pt = parse_point(xi0, "seed point")?;
            let cycles = dynamics::periodic_cycles(
                &germ,
                period_max,
                Complex64::new(0.0, 0.0),
                1e9,
                cfg.cycle_degree_cap,
                cfg.tolerances.root,
                cfg.tolerances.multiplier_band,
                cfg.seed,
            )?;
            let mut candidates: Vec<_> = cycles
                .into_iter()
                .filter(|c| c.class == dynamics::StabilityClass::Repelling)
                .collect();
            candidates.sort_by(|a, b| {
                let da = a.points.iter().map(|p| (p - seed_pt).norm()).fold(f64::INFINITY, f64::min);
                let db = b.points.iter().map(|p| (p - seed_pt).norm()).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db)
            });
            let mut last_err = Error::Precondition(
                "no repelling cycle admits the seed within its Koenigs disk".into(),
            );
            for cycle in candidates {
                match dynamics::backward_orbit(
                    &germ,
                    &cycle,
                    seed_pt,
                    steps,
                    16,
                    cfg.green_iteration_max,
                    cfg.precision_bits,
                    cfg.tolerances.multiplier_band,
                ) {
                    Ok(orbit) => return emit(&out, &json(&orbit)?),
                    Err(e) => last_err = e,
                }
            }
            Err(last_err)
        }
        Command::SurfaceCheck {
            ref f,
            mode,
            samples,
            xi_radius,
            n,
            tolerance,
        } => {
            let germ = parse_germ(f, cfg.precision_bits)?;
            let mode = match mode {
                ModeArg::Phi => ExponentMode::Phi,
                ModeArg::Green => ExponentMode::Green,
            };
            let model = SurfaceModel::new(germ, &cfg, mode, n)?;
            let xi_r = xi_radius.unwrap_or(match mode {
                ExponentMode::Phi => (model.cert_radius * 0.5).min(1e-3),
                ExponentMode::Green => model.u1_radius * 0.98,
            });
            let report = surface_check(&model, samples, xi_r, tolerance, cfg.seed)?;
            emit(&out, &json(&report)?)
        }
        Command::Diophantine {
            ref tau,
            n_max,
            ell_max,
            ref a,
            d,
            q_max,
        } => {
            let mut cfg = cfg;
            cfg.condition_i_nmax = n_max;
            cfg.condition_ii_ellmax = ell_max;
            cfg.condition_ii_bases = a.clone();
            cfg.resonance_qmax = q_max;
            let m = parse_multiplier(tau, cfg.precision_bits.max(256), cfg.cremer_bit_cap)?;
            let report = diophantine::report(&m, d, &cfg)?;
            emit(&out, &json(&report)?)
        }
    }
}
