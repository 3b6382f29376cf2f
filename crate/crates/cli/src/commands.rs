use std::fs;
use std::path::Path;

use num_traits::Signed;
use qchaos::analysis::{
    breuer_major_limit, breuer_major_moment_with_budget, fmt_diagnose, negative_q_counterexample,
    transfer_check, validate_rho, FmtReport, KernelSequence,
};
use qchaos::combinatorics::{
    enumerate_noncrossing_capped, enumerate_pairings_capped, enumerate_respecting_capped,
    gaussian_moment_fast, BlockStructure, Pairing,
};
use qchaos::density::{density_curve, quadrature_moment, DensityParams};
use qchaos::kernels::{symmetrize, Grid, Kernel, RhoFunction};
use qchaos::moments::{fourth_moment_decomposition, joint_moment_capped};
use qchaos::qalgebra::{int, parse_rational, ratio, rational_to_f64};
use qchaos::{ChaosElement, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::{
    BreuerArgs, DensityArgs, FmtArgs, MomentsArgs, PairingsArgs, SequenceArgs, SequenceKind, Stat,
    TransferArgs,
};
use crate::output::{poly_json, poly_text, rational_json, surd_json, surd_text, to_json, Output};
use crate::{CliError, Session};

/// Output plus a golden-check failure message, if any.
pub struct Outcome {
    pub output: Output,
    pub mismatch: Option<String>,
}

impl From<Output> for Outcome {
    fn from(output: Output) -> Self {
        Outcome {
            output,
            mismatch: None,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_kernel(path: &Path) -> Result<Kernel, CliError> {
    Kernel::from_json(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_list(values: &[String]) -> Result<Vec<Rational>, CliError> {
    values
        .iter()
        .map(|v| parse_rational(v).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

pub fn pairings(session: &Session, args: &PairingsArgs) -> Result<Outcome, CliError> {
    let cap = session.max_points;
    let (points, constraint, iter) = if let Some(sizes) = &args.blocks {
        let b = BlockStructure::new(sizes.clone())?;
        let label = format!("respecting {sizes:?}");
        (b.total(), label, enumerate_respecting_capped(&b, cap)?)
    } else {
        let points = args
            .points
            .expect("clap requires --points without --blocks");
        if args.noncrossing {
            (
                points,
                "noncrossing".to_string(),
                enumerate_noncrossing_capped(points, cap)?,
            )
        } else {
            (
                points,
                "all".to_string(),
                enumerate_pairings_capped(points, cap)?,
            )
        }
    };
    let listed: Option<Vec<Pairing>> = args.list.then(|| iter.clone().collect());
    let histogram = match &listed {
        Some(all) => {
            let mut hist = Vec::new();
            for p in all {
                if hist.len() <= p.crossings() {
                    hist.resize(p.crossings() + 1, 0u64);
                }
                hist[p.crossings()] += 1;
            }
            hist
        }
        None => iter.crossing_histogram(),
    };
    let total: u64 = histogram.iter().sum();
    let mut json = json!({ "points": points, "constraint": constraint, "total": total });
    if let Some(all) = &listed {
        json["pairings"] = all
            .iter()
            .map(|p| json!({ "pairing": p.to_text(), "crossings": p.crossings() }))
            .collect();
        let mut out = Output::new(json, &["pairing", "crossings"]);
        for p in all {
            out.row(vec![p.to_text(), p.crossings().to_string()]);
        }
        return Ok(out.into());
    }
    if args.stat == Stat::Count {
        let mut out = Output::new(json, &["total"]);
        out.row(vec![total.to_string()]);
        return Ok(out.into());
    }
    let nonzero: Vec<(usize, u64)> = histogram
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(cr, &c)| (cr, c))
        .collect();
    json["histogram"] = nonzero
        .iter()
        .map(|(cr, c)| json!({ "crossings": cr, "count": c }))
        .collect();
    let mut out = Output::new(json, &["crossings", "count"]);
    for (cr, c) in nonzero {
        out.row(vec![cr.to_string(), c.to_string()]);
    }
    Ok(out.into())
}

pub fn moments(session: &Session, args: &MomentsArgs) -> Result<Outcome, CliError> {
    let q = session.q.as_ref();
    if let Some(order) = args.gaussian {
        let m = gaussian_moment_fast(order);
        let mut out = Output::new(
            json!({ "order": order, "moment": poly_json(&m, q) }),
            &["order", "moment"],
        );
        out.row(vec![order.to_string(), poly_text(&m, q)]);
        return Ok(out.into());
    }
    let elems = args
        .kernels
        .iter()
        .map(|p| Ok(ChaosElement::new(load_kernel(p)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    if args.decompose {
        let [f] = elems.as_slice() else {
            return Err(CliError::Usage(
                "--decompose takes exactly one kernel".into(),
            ));
        };
        let d = fourth_moment_decomposition(f)?;
        let terms: Vec<_> = d
            .terms
            .iter()
            .map(|t| {
                json!({
                    "p": t.p,
                    "q_contraction_norm": poly_json(&t.q_contraction_norm, q),
                    "weight": poly_json(&t.weight, q),
                    "contraction_norm": rational_json(&t.contraction_norm),
                })
            })
            .collect();
        let json = json!({
            "n": d.n,
            "norm_q": poly_json(&d.norm_q, q),
            "leading": poly_json(&d.leading, q),
            "terms": terms,
            "correction": poly_json(&d.correction(), q),
            "fourth_moment": poly_json(&d.total(), q),
        });
        let mut out = Output::new(json, &["quantity", "value"]);
        out.row(vec!["norm_q".into(), poly_text(&d.norm_q, q)]);
        out.row(vec!["leading".into(), poly_text(&d.leading, q)]);
        for t in &d.terms {
            out.row(vec![
                format!("q_contraction_norm_{}", t.p),
                poly_text(&t.q_contraction_norm, q),
            ]);
            out.row(vec![format!("weight_{}", t.p), poly_text(&t.weight, q)]);
            out.row(vec![
                format!("contraction_norm_{}", t.p),
                t.contraction_norm.to_string(),
            ]);
        }
        out.row(vec!["correction".into(), poly_text(&d.correction(), q)]);
        out.row(vec!["fourth_moment".into(), poly_text(&d.total(), q)]);
        return Ok(out.into());
    }
    let result = joint_moment_capped(&elems, session.max_points)?;
    let orders: Vec<usize> = elems.iter().map(ChaosElement::order).collect();
    let json = json!({
        "orders": orders,
        "moment": surd_json(&result.value, q),
        "pairings": result.pairing_count,
        "terms_evaluated": result.terms_evaluated,
    });
    let mut out = Output::new(json, &["quantity", "value"]);
    out.row(vec!["moment".into(), surd_text(&result.value, q)]);
    out.row(vec!["pairings".into(), result.pairing_count.to_string()]);
    out.row(vec![
        "terms_evaluated".into(),
        result.terms_evaluated.to_string(),
    ]);
    Ok(out.into())
}

pub fn counterexample() -> Result<Outcome, CliError> {
    let report = negative_q_counterexample()?;
    let mut out = Output::new(to_json(&report), &["check", "expected", "actual", "pass"]);
    for c in &report.checks {
        out.row(vec![
            c.name.clone(),
            c.expected.clone(),
            c.actual.clone(),
            c.pass.to_string(),
        ]);
    }
    let mismatch = (!report.passed).then(|| {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        format!("golden values differ: {}", failed.join(", "))
    });
    Ok(Outcome {
        output: out,
        mismatch,
    })
}

fn random_sequence(n: usize, seed: u64) -> KernelSequence {
    KernelSequence::from_fn(
        format!("random symmetric, arity {n}, seed {seed}"),
        n,
        move |k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let grid = Grid::uniform(2, int(1))?;
            let f = Kernel::from_fn(grid, n, |_| {
                ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3))
            });
            Ok(symmetrize(&f))
        },
    )
}

fn build_sequence(
    args: &SequenceArgs,
    seed: u64,
) -> Result<(KernelSequence, Vec<usize>), CliError> {
    if !args.kernel_files.is_empty() {
        let kernels = args
            .kernel_files
            .iter()
            .map(|p| load_kernel(p))
            .collect::<Result<Vec<_>, _>>()?;
        let n = kernels[0].arity();
        let ks = (1..=kernels.len()).collect();
        let names: Vec<String> = args
            .kernel_files
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        let seq = KernelSequence::from_fn(format!("files {}", names.join(", ")), n, move |k| {
            Ok(kernels[k - 1].clone())
        });
        return Ok((seq, ks));
    }
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let seq = match args.sequence {
        SequenceKind::Spread => KernelSequence::spread(args.n),
        SequenceKind::Pure => KernelSequence::pure(args.n),
        SequenceKind::Random => random_sequence(args.n, seed),
    };
    Ok((seq, args.k_list.clone()))
}

fn fmt_header(n: usize, leading: &[&str]) -> Vec<String> {
    let mut header: Vec<String> = leading.iter().map(ToString::to_string).collect();
    header.extend(
        ["k", "norm_q", "fourth_moment", "target", "excess"]
            .iter()
            .map(ToString::to_string),
    );
    header.extend((1..n).map(|p| format!("contraction_norm_{p}")));
    header
}

fn fmt_rows(report: &FmtReport, leading: &[String], out: &mut Output) {
    for row in &report.rows {
        let mut cells = leading.to_vec();
        cells.extend([
            row.k.to_string(),
            row.norm_q.to_string(),
            row.fourth_moment.to_string(),
            report.target.to_string(),
            row.excess.to_string(),
        ]);
        cells.extend(row.contraction_norms.iter().map(ToString::to_string));
        out.row(cells);
    }
}

pub fn fmt(session: &Session, args: &FmtArgs) -> Result<Outcome, CliError> {
    let Some(q) = &session.q else {
        return Err(CliError::Usage(
            "fmt-diagnose needs a rational --q in [0, 1]".into(),
        ));
    };
    let (seq, ks) = build_sequence(&args.sequence, session.seed)?;
    let report = fmt_diagnose(&seq, q, &ks)?;
    let mut out = Output::new(to_json(&report), &[]);
    out.header = fmt_header(report.n, &[]);
    fmt_rows(&report, &[], &mut out);
    Ok(out.into())
}

pub fn transfer(session: &Session, args: &TransferArgs) -> Result<Outcome, CliError> {
    let (seq, ks) = build_sequence(&args.sequence, session.seed)?;
    let qs = parse_list(&args.q_list)?;
    let report = transfer_check(&seq, &ks, &qs)?;
    let mut out = Output::new(to_json(&report), &[]);
    out.header = fmt_header(report.n, &["q", "sigma_sq"]);
    for column in &report.columns {
        let leading = [column.q.to_string(), column.sigma_sq.to_string()];
        fmt_rows(&column.report, &leading, &mut out);
    }
    let mismatch = (!report.contraction_columns_identical)
        .then(|| "contraction norms differ across q".to_string());
    Ok(Outcome {
        output: out,
        mismatch,
    })
}

pub fn breuer_major(session: &Session, args: &BreuerArgs) -> Result<Outcome, CliError> {
    let q = session.q.as_ref();
    let rho = match (&args.rho, &args.rho_values) {
        (Some(path), _) => RhoFunction::from_json(&read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        (None, Some(values)) => RhoFunction::new(parse_list(values)?)?,
        (None, None) => return Err(CliError::Usage("pass --rho or --rho-values".into())),
    };
    let check = validate_rho(&rho, 4097);
    if !check.nonnegative {
        eprintln!(
            "warning: rho is not positive definite (spectral density {:.3e} at theta = {:.4})",
            check.min_spectral_density, check.theta_at_min
        );
    }
    let base = parse_list(&args.times)?;
    let times: Vec<Rational> = match &args.orders {
        None => base,
        Some(orders) => {
            if orders.len() != base.len() {
                return Err(CliError::Usage(format!(
                    "--orders has {} entries but --times has {}",
                    orders.len(),
                    base.len()
                )));
            }
            base.iter()
                .zip(orders)
                .flat_map(|(t, &m)| std::iter::repeat_n(t.clone(), m))
                .collect()
        }
    };
    let limit = breuer_major_limit(&rho, args.n, &times)?;
    let mut rows = Vec::new();
    let mut out = Output::new(
        json!(null),
        &[
            "k",
            "moment",
            "limit",
            "abs_error",
            "pairings",
            "multigraphs",
            "visited",
        ],
    );
    for &k in &args.k_list {
        let m = breuer_major_moment_with_budget(&rho, args.n, k, &times, args.budget)?;
        let error = q.map(|q| {
            let at = m.value.eval(q);
            let lim = limit.eval(q);
            match at.as_rational() {
                Some(v) => rational_json(&(v - &lim).abs()),
                None => json!({ "approx": (at.to_f64() - rational_to_f64(&lim)).abs() }),
            }
        });
        out.row(vec![
            k.to_string(),
            surd_text(&m.value, q),
            poly_text(&limit, q),
            error
                .as_ref()
                .map(|e| {
                    e["exact"]
                        .as_str()
                        .map(String::from)
                        .unwrap_or_else(|| e["approx"].to_string())
                })
                .unwrap_or_default(),
            m.pairings.to_string(),
            m.multigraphs.to_string(),
            m.visited.to_string(),
        ]);
        let mut row = json!({
            "k": k,
            "moment": surd_json(&m.value, q),
            "pairings": m.pairings,
            "multigraphs": m.multigraphs,
            "visited": m.visited,
        });
        if let Some(e) = error {
            row["abs_error"] = e;
        }
        rows.push(row);
    }
    out.json = json!({
        "n": args.n,
        "times": times.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "rho": rho.values().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "rho_check": to_json(&check),
        "limit": poly_json(&limit, q),
        "rows": rows,
    });
    Ok(out.into())
}

pub fn density(session: &Session, args: &DensityArgs) -> Result<Outcome, CliError> {
    let Some(q) = &session.q else {
        return Err(CliError::Usage(
            "density needs a numeric --q in [0, 1]".into(),
        ));
    };
    let mut params = DensityParams::new(rational_to_f64(q))?;
    if let Some(m) = args.truncation {
        params = params.with_truncation(m)?;
    }
    if let Some(nodes) = args.nodes {
        params = params.with_nodes(nodes)?;
    }
    if let Some(orders) = &args.moments {
        let checks = orders
            .iter()
            .map(|&k| quadrature_moment(&params, k))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Output::new(
            json!({ "params": to_json(&params), "moments": to_json(&checks) }),
            &[
                "k",
                "exact",
                "quadrature",
                "abs_error",
                "error_estimate",
                "truncation_tail",
            ],
        );
        for c in &checks {
            out.row(vec![
                c.k.to_string(),
                c.exact.to_string(),
                c.quadrature.to_string(),
                format!("{:e}", c.abs_error),
                format!("{:e}", c.error_estimate),
                format!("{:e}", c.truncation_tail),
            ]);
        }
        return Ok(out.into());
    }
    let curve = density_curve(&params, args.points);
    let samples: Vec<_> = curve
        .iter()
        .map(|(x, d)| json!({ "x": x, "density": d }))
        .collect();
    let mut out = Output::new(
        json!({ "params": to_json(&params), "samples": samples }),
        &["x", "density"],
    );
    for (x, d) in &curve {
        out.row(vec![x.to_string(), d.to_string()]);
    }
    Ok(out.into())
}
