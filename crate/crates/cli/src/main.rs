use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::process::ExitCode;
use tiltlab_core::arith::{fmt_q, Prime};
use tiltlab_core::axioms::check_axioms;
use tiltlab_core::closure::{check_root_closed, transfer_suite, Ambient, Mode, RingPair};
use tiltlab_core::error::Error;
use tiltlab_core::monoidal::{sharp, LiftMode};
use tiltlab_core::ramified::{
    assemble_perfectoid, delta_table, find_epsilon_from_table, KummerCoverSpec,
};
use tiltlab_core::report::{checks_markdown, Check};
use tiltlab_core::suite::run_suite;
use tiltlab_core::tilt::{check_presentation, small_tilt};
use tiltlab_core::tower::{build_tower, TowerHandle, TowerSpec};

#[derive(Parser)]
#[command(
    name = "tiltlab",
    about = "Verify perfectoid tower axioms, tilts and monoidal maps at finite precision"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Args)]
struct Common {
    /// Tower spec file (JSON).
    #[arg(long)]
    spec: Option<String>,
    /// Prime of an inline tower, used when no spec file is given.
    #[arg(long)]
    p: Option<u64>,
    /// Kummer exponent of an inline tower; omit for the pure tower.
    #[arg(long)]
    m: Option<u64>,
    /// p-adic digits of precision.
    #[arg(long)]
    prec: Option<u32>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the perfectoid tower axioms.
    Axioms(Common),
    /// Present a small tilt and check the presentation.
    Tilt {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        layer: u32,
    },
    /// Evaluate the monoidal map on a small tilt element.
    Sharp {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        layer: u32,
        #[arg(long)]
        element: String,
    },
    /// Cartesian and p-root closure checks on the layers and small tilts.
    Closure {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        /// Largest power of f used to localize.
        #[arg(long, default_value_t = 2)]
        ccap: u32,
        /// Also check n-th root closedness for 2 <= n <= ncap.
        #[arg(long, default_value_t = 0)]
        ncap: u64,
    },
    /// Ramification constants of a Kummer cover and the assembled tower.
    Ramify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        levels: u32,
    },
    /// Run the acceptance battery.
    Suite(Common),
}

struct Output {
    json: Value,
    md: String,
    fail: bool,
}

fn any_fail<'a>(checks: impl IntoIterator<Item = &'a Check>) -> bool {
    checks.into_iter().any(|c| c.verdict.is_fail())
}

fn tower(c: &Common) -> Result<TowerHandle, Error> {
    let mut spec = match (&c.spec, c.p) {
        (Some(path), _) => {
            let src =
                std::fs::read_to_string(path).map_err(|e| Error::Spec(format!("{path}: {e}")))?;
            TowerSpec::from_json(&src)?
        }
        (None, Some(p)) => {
            let (n, d) = (c.prec.unwrap_or(6), c.depth.unwrap_or(3));
            match c.m {
                None => TowerSpec::pure(p, n, d)?,
                Some(m) => {
                    let w = tiltlab_core::ramified::find_epsilon(Prime::new(p)?, m, 16)?;
                    TowerSpec::kummer(p, m, n, d, w.epsilon, w.level)?
                }
            }
        }
        (None, None) => return Err(Error::Spec("give --spec or --p".into())),
    };
    if let Some(n) = c.prec {
        spec = spec.with_digits(n);
    }
    if let Some(d) = c.depth {
        spec = spec.with_depth(d);
    }
    build_tower(&spec)
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn axioms(c: &Common) -> Result<Output, Error> {
    let h = tower(c)?;
    let r = check_axioms(&h, c.samples, c.seed)?;
    Ok(Output {
        md: checks_markdown("Axioms", &r.verdicts),
        fail: r.any_fail(),
        json: to_json(&r),
    })
}

fn tilt(c: &Common, layer: u32) -> Result<Output, Error> {
    let h = tower(c)?;
    let m = h
        .depth()
        .checked_sub(layer)
        .filter(|&m| m > 0)
        .ok_or(Error::ZeroDepth)?;
    let pres = small_tilt(&h, layer, m)?;
    let checks = check_presentation(&h, layer, m, c.samples, c.seed)?;
    let k: Vec<String> = pres
        .quotient_exponent
        .iter()
        .map(|k| k.to_string())
        .collect();
    let md = format!(
        "## Small tilt at level {layer}, depth {m}\n\nF_{}[T]/(T^{}) with v(T) = 1/{}\n\n{}",
        h.prime().get(),
        k.join(", "),
        pres.uniformizer_denominator,
        checks_markdown("Presentation", &checks)
    );
    Ok(Output {
        fail: any_fail(&checks),
        json: json!({"schema": 1, "presentation": to_json(&pres), "checks": to_json(&checks)}),
        md,
    })
}

fn sharp_cmd(c: &Common, layer: u32, element: &str) -> Result<Output, Error> {
    let h = tower(c)?;
    let m = h
        .depth()
        .checked_sub(layer)
        .filter(|&m| m > 0)
        .ok_or(Error::ZeroDepth)?;
    let pres = small_tilt(&h, layer, m)?;
    let x = pres.parse(&h, element)?;
    let s = sharp(&h, &x, LiftMode::Canonical)?;
    let md = format!(
        "## Monoidal map\n\n| element | value | layer | effective precision |\n|---|---|---|---|\n| {} | {} | {} | {} |\n",
        pres.text(&x),
        s.value,
        s.value_layer,
        fmt_q(&s.effective_precision)
    );
    Ok(Output {
        json: json!({"schema": 1, "element": pres.text(&x), "depth": m, "sharp": to_json(&s)}),
        md,
        fail: false,
    })
}

fn closure(c: &Common, mode: ModeArg, ccap: u32, ncap: u64) -> Result<Output, Error> {
    let h = tower(c)?;
    let mode = match mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Sampled => Mode::Sampled(c.samples),
    };
    let mut r = transfer_suite(&h, mode, ccap, c.seed)?;
    let p = h.prime().get();
    for n in (2..=ncap).filter(|&n| n != p) {
        for l in r.layers.iter_mut().filter(|l| l.side == "layer") {
            let pair = RingPair::layer(format!("R_{}", l.level), h.layer(l.level)?)?;
            let mode = match mode {
                Mode::Exact => Mode::Sampled(1000),
                m => m,
            };
            l.checks.push(check_root_closed(
                &pair,
                n,
                mode,
                Ambient::Localized { c_cap: ccap },
                c.seed,
            )?);
        }
    }
    let mut md = String::from("## Closure\n\n");
    for l in &r.layers {
        md.push_str(&checks_markdown(
            &format!("{} {}", l.side, l.level),
            &l.checks,
        ));
        md.push('\n');
    }
    Ok(Output {
        fail: r.any_fail(),
        json: to_json(&r),
        md,
    })
}

fn ramify(c: &Common, levels: u32) -> Result<Output, Error> {
    let p = c.p.unwrap_or(5);
    let m = c.m.unwrap_or(2);
    let spec = KummerCoverSpec::new(p, m, c.prec.unwrap_or(6), levels)?;
    let table = delta_table(&spec)?;
    let w = find_epsilon_from_table(&spec, &table)?;
    let a = assemble_perfectoid(&spec, &w, c.depth.unwrap_or(2), c.samples, c.seed)?;
    let mut md = format!(
        "## Kummer cover p = {p}, m = {m}\n\n| n | delta_n | p^n delta_n | annihilator exponent |\n|---|---|---|---|\n"
    );
    for r in &table.rows {
        md.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            r.n,
            fmt_q(&r.delta),
            fmt_q(&r.p_n_delta),
            r.annihilator_exponent
        ));
    }
    md.push_str(&format!(
        "\n| eps | N | N' | certificate |\n|---|---|---|---|\n| {} | {} | {} | {} |\n\n",
        fmt_q(&w.epsilon),
        w.level,
        a.start_level,
        if w.certificate_verified {
            "verified"
        } else {
            "not verified"
        }
    ));
    md.push_str(&checks_markdown(
        "Axioms of the assembled tower",
        &a.axioms.verdicts,
    ));
    Ok(Output {
        fail: a.axioms.any_fail() || !w.certificate_verified,
        json: json!({"schema": 1, "delta_table": to_json(&table), "epsilon": to_json(&w), "assembly": to_json(&a)}),
        md,
    })
}

fn suite(c: &Common) -> Result<Output, Error> {
    let r = run_suite(c.seed)?;
    let mut md = format!(
        "## Acceptance battery, seed {}\n\n| # | criterion | verdict |\n|---|---|---|\n",
        c.seed
    );
    for k in &r.criteria {
        md.push_str(&format!(
            "| {} | {} | {} |\n",
            k.number,
            k.title,
            to_json(&k.verdict).as_str().unwrap_or("")
        ));
    }
    for k in &r.criteria {
        md.push('\n');
        md.push_str(&checks_markdown(
            &format!("{}. {}", k.number, k.title),
            &k.checks,
        ));
    }
    Ok(Output {
        fail: !r.all_ok(),
        json: to_json(&r),
        md,
    })
}

fn common(cmd: &Cmd) -> &Common {
    match cmd {
        Cmd::Axioms(c) | Cmd::Suite(c) => c,
        Cmd::Tilt { common, .. }
        | Cmd::Sharp { common, .. }
        | Cmd::Closure { common, .. }
        | Cmd::Ramify { common, .. } => common,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("TILTLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let c = common(&cli.cmd);
    let out = match &cli.cmd {
        Cmd::Axioms(c) => axioms(c),
        Cmd::Tilt { common, layer } => tilt(common, *layer),
        Cmd::Sharp {
            common,
            layer,
            element,
        } => sharp_cmd(common, *layer, element),
        Cmd::Closure {
            common,
            mode,
            ccap,
            ncap,
        } => closure(common, *mode, *ccap, *ncap),
        Cmd::Ramify { common, levels } => ramify(common, *levels),
        Cmd::Suite(c) => suite(c),
    };
    let out = match out {
        Ok(o) => o,
        Err(e) => {
            eprintln!("tiltlab: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match c.format {
        Format::Json => serde_json::to_string_pretty(&out.json).expect("json") + "\n",
        Format::Md => out.md.clone(),
    };
    match &c.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("tiltlab: {path}: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(exit_code(&out))
}

fn exit_code(out: &Output) -> u8 {
    u8::from(out.fail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tiltlab_core::report::{Verdict, Witness};

    #[test]
    fn failing_check_exits_one() {
        let undecided = [Check::new("x", Verdict::UndecidedAtPrecision)];
        let failed = [Check::fail("x", Witness::new(0, "t", "op"))];
        let out = |checks: &[Check]| Output {
            json: Value::Null,
            md: String::new(),
            fail: any_fail(checks),
        };
        assert_eq!(exit_code(&out(&undecided)), 0);
        assert_eq!(exit_code(&out(&failed)), 1);
    }
}
