//! Command-line front end. Every operation of the library is reachable from
//! a subcommand with deterministic, machine-readable output.
//!
//! Exit codes: 0 success, 2 usage error, 3 resource-budget abort,
//! 4 verification mismatch, 1 any other failure.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cubemoments::asymptotics::{
    build_dep_graph, cumulant_decay_check, janson_ratio, moments_to_cumulants, normal_moment,
    scaled_limit,
};
use cubemoments::cubes::KernelMode;
use cubemoments::exactalg::{parse_rational, BiPoly, Rat, RenderFormat};
use cubemoments::moments::{
    central_moment_with, mean_closed, mixed_moment, mixed_moment_threaded, second_moment_closed,
    variance_closed, Budget, MomentError, MomentSpec,
};
use cubemoments::oracle::{
    count_subcubes, exact_moment_subsets, exact_moment_tuples, mc_estimate, CountMethod,
    SubsetBitmap,
};

const EXIT_RESOURCE: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cubemoments",
    about = "Exact moments of subcube counts in random subsets of the n-cube"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EngineOpts {
    /// Render format for polynomials
    #[arg(long, default_value = "plain")]
    format: RenderFormat,
    /// Kernel enumeration mode
    #[arg(long, default_value = "orbits")]
    mode: Mode,
    /// Abort after this many kernels
    #[arg(long, default_value_t = 50_000_000)]
    budget_kernels: u64,
    /// Abort after this many seconds in the kernel engine
    #[arg(long, default_value_t = 1800.0)]
    budget_seconds: f64,
    /// Worker threads for the moment engine (output is thread-count independent)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl EngineOpts {
    fn budget(&self) -> Budget {
        Budget {
            max_kernels: self.budget_kernels,
            max_seconds: self.budget_seconds,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Orbits,
    Exhaustive,
}

impl From<Mode> for KernelMode {
    fn from(m: Mode) -> KernelMode {
        match m {
            Mode::Orbits => KernelMode::Orbits,
            Mode::Exhaustive => KernelMode::Exhaustive,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mixed moment E[X_{r_1} ... X_{r_k}] as a polynomial in n and 2^n
    Moment {
        /// Comma-separated dimension list, e.g. 1,1,1
        #[arg(long, value_parser = parse_rs)]
        rs: std::vec::Vec<u32>,
        /// Point-inclusion probability as an exact rational "num/den"
        #[arg(long, default_value = "1/2", value_parser = parse_p)]
        p: Rat,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Central moment E[(X_r - mu)^k]
    Central {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "1/2", value_parser = parse_p)]
        p: Rat,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Closed-form mean mu_r(n)
    Mean {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "1/2", value_parser = parse_p)]
        p: Rat,
        #[arg(long, default_value = "plain")]
        format: RenderFormat,
    },
    /// Variance of X_r (closed form or engine pipeline, p = 1/2)
    Variance {
        #[arg(long)]
        r: u32,
        /// Use the closed-form summation instead of the kernel engine
        #[arg(long)]
        closed_form: bool,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Second moment E[X_r^2] (closed form or engine pipeline, p = 1/2)
    SecondMoment {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        closed_form: bool,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Scaled central-moment limits for k = 3..kmax against N(0,1) moments
    Limits {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 6)]
        kmax: u32,
        #[arg(long, default_value = "plain")]
        format: RenderFormat,
    },
    /// Cumulants kappa_1..kappa_kmax of X_r and the decay check
    Cumulants {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 4)]
        kmax: u32,
        #[arg(long, default_value = "plain")]
        format: RenderFormat,
    },
    /// Dependency graph statistics for the r-subcubes of {0,1}^n
    Depgraph {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "plain")]
        format: RenderFormat,
    },
    /// Normal-approximation ratio (N/M)^{1/m} M / sigma over a range of n
    Ratio {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 3)]
        m: u32,
        /// Inclusive range "lo:hi"
        #[arg(long, value_parser = parse_range)]
        n_range: (u32, u32),
        #[arg(long, default_value = "plain")]
        format: RenderFormat,
    },
    /// Compare the symbolic moment against an enumeration oracle at fixed n
    Verify {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_rs)]
        rs: std::vec::Vec<u32>,
        /// Oracle to compare against
        #[arg(long, default_value = "subsets")]
        oracle: Oracle,
        #[arg(long, default_value = "1/2", value_parser = parse_p)]
        p: Rat,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Count r-subcubes of an explicit subset
    Count {
        /// Comma-separated points, e.g. 000,001,010,011,100,111
        #[arg(long)]
        s: String,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "plain")]
        format: RenderFormat,
    },
    /// Monte-Carlo estimate of E[X_r^k] at p = 1/2
    Mc {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "plain")]
        format: RenderFormat,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Oracle {
    Subsets,
    Tuples,
}

fn parse_rs(s: &str) -> Result<Vec<u32>, String> {
    let rs: Result<Vec<u32>, _> = s.split(',').map(|t| t.trim().parse::<u32>()).collect();
    let rs = rs.map_err(|_| format!("bad dimension list {s:?}"))?;
    if rs.is_empty() {
        return Err("empty dimension list".into());
    }
    Ok(rs)
}

fn parse_p(s: &str) -> Result<Rat, String> {
    let p = parse_rational(s)?;
    if p <= Rat::from_integer(0.into()) || p >= Rat::from_integer(1.into()) {
        return Err(format!("p must lie strictly between 0 and 1, got {p}"));
    }
    Ok(p)
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: u32 = lo.parse().map_err(|_| format!("bad range start {lo:?}"))?;
    let hi: u32 = hi.parse().map_err(|_| format!("bad range end {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e
                .downcast_ref::<MomentError>()
                .filter(|m| m.is_resource_abort())
                .map(|_| EXIT_RESOURCE)
                .unwrap_or(1);
            ExitCode::from(code)
        }
    }
}

fn print_poly(
    query: serde_json::Value,
    poly: &BiPoly,
    format: RenderFormat,
) {
    if format == RenderFormat::Json {
        let result: serde_json::Value =
            serde_json::from_str(&poly.to_json_string()).expect("well-formed poly json");
        println!("{}", json!({"query": query, "result": result}));
    } else {
        println!("{}", poly.render(format));
    }
}

fn run(command: Command) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match command {
        Command::Moment { rs, p, engine } => {
            let spec = MomentSpec::new(rs.clone(), p.clone())?;
            let poly =
                mixed_moment_threaded(&spec, engine.mode.into(), &engine.budget(), engine.threads)?;
            print_poly(
                json!({"command": "moment", "rs": rs, "p": p.to_string()}),
                &poly,
                engine.format,
            );
        }
        Command::Central { r, k, p, engine } => {
            let poly = central_moment_with(r, k, &p, engine.mode.into(), &engine.budget())?;
            print_poly(
                json!({"command": "central", "r": r, "k": k, "p": p.to_string()}),
                &poly,
                engine.format,
            );
        }
        Command::Mean { r, p, format } => {
            let poly = mean_closed(r, &p);
            print_poly(
                json!({"command": "mean", "r": r, "p": p.to_string()}),
                &poly,
                format,
            );
        }
        Command::Variance {
            r,
            closed_form,
            engine,
        } => {
            let poly = if closed_form {
                variance_closed(r)
            } else {
                central_moment_with(
                    r,
                    2,
                    &parse_rational("1/2").unwrap(),
                    engine.mode.into(),
                    &engine.budget(),
                )?
            };
            print_poly(
                json!({"command": "variance", "r": r, "closed_form": closed_form}),
                &poly,
                engine.format,
            );
        }
        Command::SecondMoment {
            r,
            closed_form,
            engine,
        } => {
            let poly = if closed_form {
                second_moment_closed(r)
            } else {
                mixed_moment(&MomentSpec::uniform(vec![r, r])?)?
            };
            print_poly(
                json!({"command": "second-moment", "r": r, "closed_form": closed_form}),
                &poly,
                engine.format,
            );
        }
        Command::Limits { r, kmax, format } => {
            let mut records = Vec::new();
            for k in 3..=kmax {
                let limit = scaled_limit(r, k)?;
                let reference = normal_moment(k);
                let pass = limit == reference;
                if format != RenderFormat::Json {
                    println!(
                        "k={k} limit={limit} normal={reference} {}",
                        if pass { "pass" } else { "FAIL" }
                    );
                }
                records.push(json!({
                    "k": k,
                    "limit_num": limit.numer().to_string(),
                    "limit_den": limit.denom().to_string(),
                    "normal_num": reference.numer().to_string(),
                    "normal_den": reference.denom().to_string(),
                    "pass": pass,
                }));
            }
            if format == RenderFormat::Json {
                println!(
                    "{}",
                    json!({"query": {"command": "limits", "r": r, "kmax": kmax}, "result": records})
                );
            }
        }
        Command::Cumulants { r, kmax, format } => {
            let ms: Vec<BiPoly> = (1..=kmax)
                .map(|j| mixed_moment(&MomentSpec::uniform(vec![r; j as usize])?))
                .collect::<Result<_, _>>()?;
            let cs = moments_to_cumulants(&ms, kmax as usize)?;
            if format == RenderFormat::Json {
                let report = if kmax >= 3 {
                    Some(cumulant_decay_check(r, kmax)?)
                } else {
                    None
                };
                let kappas: Vec<serde_json::Value> = cs
                    .kappas
                    .iter()
                    .map(|p| serde_json::from_str(&p.to_json_string()).unwrap())
                    .collect();
                println!(
                    "{}",
                    json!({
                        "query": {"command": "cumulants", "r": r, "kmax": kmax},
                        "result": {"kappas": kappas, "decay": report.map(|d| d.records)},
                    })
                );
            } else {
                for (i, kappa) in cs.kappas.iter().enumerate() {
                    println!("kappa_{} = {}", i + 1, kappa.render(format));
                }
                if kmax >= 3 {
                    let report = cumulant_decay_check(r, kmax)?;
                    for rec in &report.records {
                        println!(
                            "decay k={} deg_q={} deg_n={} {}",
                            rec.k,
                            rec.deg_q,
                            rec.deg_n,
                            if rec.pass { "pass" } else { "FAIL" }
                        );
                    }
                }
            }
        }
        Command::Depgraph { n, r, format } => {
            let g = build_dep_graph(n, r)?;
            if format == RenderFormat::Json {
                println!(
                    "{}",
                    json!({"query": {"command": "depgraph", "n": n, "r": r}, "result": g.stats})
                );
            } else {
                println!(
                    "vertices={} max_degree={} regular={} sigma={:.6}",
                    g.stats.vertex_count, g.stats.max_degree, g.stats.is_regular, g.stats.sigma
                );
            }
        }
        Command::Ratio {
            r,
            m,
            n_range: (lo, hi),
            format,
        } => {
            let mut records = Vec::new();
            for n in lo..=hi {
                let jr = janson_ratio(n, r, m)?;
                if format != RenderFormat::Json {
                    println!(
                        "n={} ratio={:.10} M={}{}",
                        n,
                        jr.ratio,
                        jr.max_degree,
                        if jr.max_degree_exact { "" } else { " (bound)" }
                    );
                }
                records.push(jr);
            }
            if format == RenderFormat::Json {
                println!(
                    "{}",
                    json!({
                        "query": {"command": "ratio", "r": r, "m": m, "n_range": [lo, hi]},
                        "result": records,
                    })
                );
            }
        }
        Command::Verify {
            n,
            rs,
            oracle,
            p,
            engine,
        } => {
            let spec = MomentSpec::new(rs.clone(), p.clone())?;
            let symbolic =
                mixed_moment_threaded(&spec, engine.mode.into(), &engine.budget(), engine.threads)?
                    .eval_at_n(n);
            let oracle_value = match oracle {
                Oracle::Subsets => {
                    if p != parse_rational("1/2").unwrap() {
                        return Err("the subsets oracle only supports p = 1/2".into());
                    }
                    exact_moment_subsets(n, &rs)?
                }
                Oracle::Tuples => exact_moment_tuples(n, &rs, &p, 100_000_000)?,
            };
            let matches = symbolic == oracle_value;
            if engine.format == RenderFormat::Json {
                println!(
                    "{}",
                    json!({
                        "query": {"command": "verify", "n": n, "rs": rs, "p": p.to_string()},
                        "result": {
                            "symbolic": symbolic.to_string(),
                            "oracle": oracle_value.to_string(),
                            "match": matches,
                        }
                    })
                );
            } else {
                println!(
                    "symbolic = {symbolic}, oracle = {oracle_value}, {}",
                    if matches { "MATCH" } else { "MISMATCH" }
                );
            }
            if !matches {
                return Ok(ExitCode::from(EXIT_MISMATCH));
            }
        }
        Command::Count { s, r, format } => {
            let subset = SubsetBitmap::parse(&s)?;
            let count = count_subcubes(&subset, r, CountMethod::BitParallel)?;
            if format == RenderFormat::Json {
                println!(
                    "{}",
                    json!({
                        "query": {"command": "count", "s": s, "r": r},
                        "result": count,
                    })
                );
            } else {
                println!("{count}");
            }
        }
        Command::Mc {
            n,
            r,
            k,
            samples,
            seed,
            format,
        } => {
            let est = mc_estimate(n, r, k, samples, seed)?;
            if format == RenderFormat::Json {
                println!(
                    "{}",
                    json!({
                        "query": {"command": "mc", "n": n, "r": r, "k": k,
                                  "samples": samples, "seed": seed},
                        "result": {
                            "mean": est.mean,
                            "std_err": est.std_err,
                            "algorithm": est.algorithm,
                        }
                    })
                );
            } else {
                println!(
                    "mean={} std_err={} samples={} seed={} rng={}",
                    est.mean, est.std_err, est.samples, est.seed, est.algorithm
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
