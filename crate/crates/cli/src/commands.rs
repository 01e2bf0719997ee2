use std::path::Path;

use serde_json::{json, Map, Value};

use infree_core::cumulant::{
    check_inf_freeness, cumulants_to_moments, goe_non_freeness, moments_to_cumulants, wishart_limit_functional,
    InfFunctional, JsonScalar,
};
use infree_core::genus::{
    goe_infinitesimal_moment, goe_mixed_moment_poly, goe_moment_poly, wishart_limits, wishart_moment_poly, Caps,
};
use infree_core::lab::{
    goe_power_estimate, infinitesimal_estimator, parse_exact_matrix, verify_universal_rule, wishart_power_estimate,
    ConstantEnsemble, Sampler, UNIVERSAL_RULE_LADDER,
};
use infree_core::measure::{
    density_grid, goe_inf_measure, marchenko_pastur, semicircle_measure, stieltjes_invert, wishart_inf_measure, Atom,
    SignedMeasureModel, INVERSION_EPS,
};
use infree_core::nc::{
    blocks_json, enumerate_half_pairings, enumerate_nc, enumerate_nc2delta, enumerate_pairings, pairs_json,
};
use infree_core::poly::LaurentPoly;
use infree_core::scalar::{format_rational, int, Rational, Scalar};
use infree_core::series::Series;
use infree_core::transform::{
    cauchy_series, constant_r, g_from_r, goe_g_closed, goe_r, mp_cauchy, r_from_g, semicircle_g, wishart_g,
};
use infree_core::word::Word;

use crate::output::Report;
use crate::{core, CliError, Command, DensityMethod, DiagramKind, Ensemble, EnsembleArgs, Family, TransformDirection, VerifyCommand};

/// Cap on `n` for `enumerate`, overridable through the environment.
pub const ENUM_CAP_ENV: &str = "INFREE_ENUM_MAX_N";
const ENUM_CAP_DEFAULT: usize = 14;

fn enum_cap() -> usize {
    std::env::var(ENUM_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(ENUM_CAP_DEFAULT)
}

fn fmt(r: &Rational) -> String {
    format_rational(r)
}

pub fn run(command: Command) -> Result<Report, CliError> {
    let caps = Caps::from_env();
    match command {
        Command::GoeMoments { n, word } => goe_moments(n, word.as_deref(), &caps),
        Command::WishartMoments { n, word, c, cprime } => wishart_moments(n, word.as_deref(), c.zip(cprime), &caps),
        Command::Enumerate { kind, n, count } => enumerate(kind, n, count),
        Command::Cumulants { moments_file, infinitesimal, inverse } => cumulants(&moments_file, infinitesimal, inverse),
        Command::Transform { direction, order, source, input } => transform(direction, order, &source, input.as_deref(), &caps),
        Command::Density { source, grid, method, tol } => density(&source, grid, method, tol),
        Command::Simulate { ensemble, n, size, rows, ladder, c, cprime, samples, seed } => {
            simulate(ensemble, n, size, rows, ladder, c.zip(cprime), samples, seed, &caps)
        }
        Command::Verify { check } => verify(check, &caps),
    }
}

fn parse_word(text: &str) -> Result<Word, CliError> {
    text.parse::<Word>().map_err(core)
}

fn inverse_power_rows(poly: &LaurentPoly) -> Vec<Vec<String>> {
    poly.terms().map(|(k, c)| vec![(-k.n).to_string(), fmt(c)]).collect()
}

fn goe_moments(n: Option<usize>, word: Option<&str>, caps: &Caps) -> Result<Report, CliError> {
    let (key, label, poly) = match word {
        Some(w) => {
            let word = parse_word(w)?;
            let poly = goe_mixed_moment_poly(&word, caps).map_err(core)?;
            ("word", json!(word.to_string()), poly)
        }
        None => {
            let n = n.expect("clap requires n or word");
            ("n", json!(n), goe_moment_poly(n, caps).map_err(core)?)
        }
    };
    let json = json!({
        key: label,
        "polynomial": poly.to_json(),
        "limit": fmt(&poly.coeff_inv(0)),
        "infinitesimal": fmt(&poly.coeff_inv(1)),
    });
    let rows = inverse_power_rows(&poly);
    Ok(Report::new(json, poly.to_string()).with_table(vec!["inverse_power", "coefficient"], rows))
}

fn wishart_moments(
    n: Option<usize>,
    word: Option<&str>,
    limits: Option<(Rational, Rational)>,
    caps: &Caps,
) -> Result<Report, CliError> {
    let word = match word {
        Some(w) => parse_word(w)?,
        None => Word::power(0, n.expect("clap requires n or word")),
    };
    let poly = wishart_moment_poly(&word, caps).map_err(core)?;
    let mut json = json!({ "word": word.to_string(), "polynomial": poly.to_json() });
    let mut pretty = poly.to_string();
    if let Some((c, cp)) = limits {
        let (mu, mu_prime) = wishart_limits(&word, &c, &cp);
        let substituted = poly.substitute_m(&c, &cp);
        json["c"] = json!(fmt(&c));
        json["cprime"] = json!(fmt(&cp));
        json["limit"] = json!(fmt(&mu));
        json["infinitesimal"] = json!(fmt(&mu_prime));
        json["substituted"] = substituted.to_json();
        pretty.push_str(&format!("\nat M = {}N + {}: {substituted}\nlimit {} infinitesimal {}", fmt(&c), fmt(&cp), fmt(&mu), fmt(&mu_prime)));
    }
    let rows = poly.terms().map(|(k, c)| vec![k.m.to_string(), (-k.n).to_string(), fmt(c)]).collect();
    Ok(Report::new(json, pretty).with_table(vec!["m_power", "inverse_n_power", "coefficient"], rows))
}

fn enumerate(kind: DiagramKind, n: usize, count_only: bool) -> Result<Report, CliError> {
    let cap = enum_cap();
    if n > cap {
        return Err(CliError::Cap(format!("enumeration with n = {n} exceeds the cap {cap} (raise it with {ENUM_CAP_ENV})")));
    }
    let (name, items): (&str, Vec<(Value, String)>) = match kind {
        DiagramKind::Pairings => ("pairings", enumerate_pairings(n).iter().map(|p| (pairs_json(p), p.to_string())).collect()),
        DiagramKind::Nc => ("nc", enumerate_nc(n).iter().map(|p| (blocks_json(p), p.to_string())).collect()),
        DiagramKind::Ncc2 => ("ncc2", enumerate_half_pairings(n).iter().map(|h| (h.to_json(), h.to_string())).collect()),
        DiagramKind::Nc2delta => {
            ("nc2delta", enumerate_nc2delta(n).iter().map(|a| (a.to_json(), a.to_string())).collect())
        }
    };
    let count = items.len();
    if count_only {
        let json = json!({ "kind": name, "n": n, "count": count });
        let rows = vec![vec![name.to_string(), n.to_string(), count.to_string()]];
        return Ok(Report::new(json, count.to_string()).with_table(vec!["kind", "n", "count"], rows));
    }
    let pretty = items.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join("\n");
    let rows = items.iter().enumerate().map(|(i, (_, s))| vec![(i + 1).to_string(), s.clone()]).collect();
    let json = json!({ "kind": name, "n": n, "count": count, "items": items.into_iter().map(|(v, _)| v).collect::<Vec<_>>() });
    Ok(Report::new(json, pretty).with_table(vec!["index", "diagram"], rows))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn cumulants(path: &Path, infinitesimal: bool, inverse: bool) -> Result<Report, CliError> {
    let v = read_json(path)?;
    match v.get("mode").and_then(Value::as_str) {
        Some("float") => cumulant_report::<f64>(&v, infinitesimal, inverse),
        Some("exact") | None => cumulant_report::<Rational>(&v, infinitesimal, inverse),
        Some(other) => Err(CliError::Usage(format!("unknown mode {other:?}"))),
    }
}

fn cell<T: JsonScalar>(v: &T) -> String {
    match v.to_json() {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn cumulant_report<T: JsonScalar>(v: &Value, infinitesimal: bool, inverse: bool) -> Result<Report, CliError> {
    let input = InfFunctional::<T>::from_json(v).map_err(core)?;
    let out = if inverse { cumulants_to_moments(&input) } else { moments_to_cumulants(&input) }.map_err(core)?;
    let kind = if inverse { "moments" } else { "cumulants" };
    let mut words = Map::new();
    let mut rows = Vec::new();
    let mut pretty = Vec::new();
    for (w, d) in out.iter() {
        if infinitesimal {
            words.insert(w.to_string(), json!([d.re.to_json(), d.eps.to_json()]));
            rows.push(vec![w.to_string(), cell(&d.re), cell(&d.eps)]);
            pretty.push(format!("{w}: {} + ε·{}", cell(&d.re), cell(&d.eps)));
        } else {
            words.insert(w.to_string(), d.re.to_json());
            rows.push(vec![w.to_string(), cell(&d.re)]);
            pretty.push(format!("{w}: {}", cell(&d.re)));
        }
    }
    let json = json!({ "kind": kind, "mode": T::mode(), "n_max": out.n_max(), "infinitesimal": infinitesimal, "words": words });
    let header = if infinitesimal { vec!["word", "value", "inf_value"] } else { vec!["word", "value"] };
    Ok(Report::new(json, pretty.join("\n")).with_table(header, rows))
}

/// `m₀, …, m_L` and `m′₀, …, m′_L` of the chosen limit law.
fn ensemble_moments(
    source: &EnsembleArgs,
    order: usize,
    caps: &Caps,
) -> Result<(Vec<Rational>, Vec<Rational>), CliError> {
    let mut m = vec![int(1)];
    let mut mp = vec![int(0)];
    for n in 1..=order {
        match source.ensemble {
            Ensemble::Goe => {
                let poly = goe_moment_poly(n, caps).map_err(core)?;
                m.push(poly.coeff_inv(0));
                mp.push(goe_infinitesimal_moment(n, caps).map_err(core)?);
            }
            Ensemble::Wishart => {
                let (a, b) = wishart_limits(&Word::power(0, n), &source.c, &source.cprime);
                m.push(a);
                mp.push(b);
            }
        }
    }
    Ok((m, mp))
}

fn rational_list(v: &Value, key: &str) -> Result<Vec<Rational>, CliError> {
    let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| CliError::Usage(format!("input needs a {key:?} array")))?;
    arr.iter().map(|x| Rational::from_json(x).ok_or_else(|| CliError::Usage(format!("bad number {x} in {key:?}")))).collect()
}

fn transform(
    direction: TransformDirection,
    order: usize,
    source: &EnsembleArgs,
    input: Option<&Path>,
    caps: &Caps,
) -> Result<Report, CliError> {
    if order == 0 {
        return Err(CliError::Usage("--order must be positive".into()));
    }
    let file = input.map(read_json).transpose()?;
    let moments = match &file {
        Some(v) => {
            let mut m = vec![int(1)];
            m.extend(rational_list(v, "moments")?);
            m
        }
        None => ensemble_moments(source, order, caps)?.0,
    };
    let order = moments.len() - 1;
    let g = cauchy_series(&moments);
    let label = match &file {
        Some(_) => json!("input"),
        None => json!(match source.ensemble {
            Ensemble::Goe => "goe",
            Ensemble::Wishart => "wishart",
        }),
    };
    let (key, values) = match direction {
        TransformDirection::GFromR => {
            let r: Series<Rational, _> = match &file {
                Some(v) => Series::new(rational_list(v, "r")?),
                None => match source.ensemble {
                    Ensemble::Goe => goe_r(order),
                    Ensemble::Wishart => constant_r(&source.cprime, order),
                },
            };
            let inf = g_from_r(&r, &g).map_err(core)?;
            ("inf_moments", inf.moments()[1..].to_vec())
        }
        TransformDirection::RFromG => {
            let mut mp = match &file {
                Some(v) => {
                    let mut mp = vec![int(0)];
                    mp.extend(rational_list(v, "inf_moments")?);
                    mp
                }
                None => ensemble_moments(source, order, caps)?.1,
            };
            mp.truncate(moments.len());
            let r = r_from_g(&cauchy_series(&mp), &g).map_err(core)?;
            ("r", r.coeffs().to_vec())
        }
    };
    let rows: Vec<Vec<String>> = values.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), fmt(v)]).collect();
    let symbol = if key == "r" { "κ′" } else { "m′" };
    let pretty = rows.iter().map(|r| format!("{symbol}{} = {}", r[0], r[1])).collect::<Vec<_>>().join("\n");
    let json = json!({
        "direction": match direction { TransformDirection::GFromR => "g-from-r", TransformDirection::RFromG => "r-from-g" },
        "source": label,
        "order": order,
        key: values.iter().map(fmt).collect::<Vec<_>>(),
    });
    Ok(Report::new(json, pretty).with_table(vec!["n", "value"], rows))
}

fn atoms_json(atoms: &[Atom]) -> Value {
    atoms.iter().map(|a| json!({ "location": a.location, "mass": a.mass })).collect()
}

type Transform = Box<dyn Fn(num_complex::Complex64) -> Result<num_complex::Complex64, infree_core::transform::TransformError> + Sync>;

fn density(source: &EnsembleArgs, grid: usize, method: DensityMethod, tol: f64) -> Result<Report, CliError> {
    if grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let c = source.c.to_f64();
    let cp = source.cprime.to_f64();
    let (mu, mu_prime, g, g_inf): (SignedMeasureModel, SignedMeasureModel, Transform, Transform) = match source.ensemble {
        Ensemble::Goe => (semicircle_measure(), goe_inf_measure(), Box::new(semicircle_g), Box::new(goe_g_closed)),
        Ensemble::Wishart => (
            marchenko_pastur(c).map_err(core)?,
            wishart_inf_measure(c, cp).map_err(core)?,
            Box::new(move |z| mp_cauchy(c, z)),
            Box::new(move |z| wishart_g(c, cp, z)),
        ),
    };
    let mut rows = density_grid(&mu, &mu_prime, grid);
    if method == DensityMethod::Inversion {
        let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
        let inv = stieltjes_invert(g, &xs, &INVERSION_EPS, tol).map_err(core)?;
        let inv_prime = stieltjes_invert(g_inf, &xs, &INVERSION_EPS, tol).map_err(core)?;
        for ((row, a), b) in rows.iter_mut().zip(inv).zip(inv_prime) {
            row.mu = a.density;
            row.mu_prime = b.density;
        }
    }
    let (a, b) = mu_prime.support();
    let mut json = json!({
        "ensemble": match source.ensemble { Ensemble::Goe => "goe", Ensemble::Wishart => "wishart" },
        "method": match method { DensityMethod::Closed => "closed", DensityMethod::Inversion => "inversion" },
        "support": [a, b],
        "atoms": { "mu": atoms_json(mu.atoms()), "mu_prime": atoms_json(mu_prime.atoms()) },
        "rows": rows.iter().map(|r| json!({ "x": r.x, "mu_density": r.mu, "mu_prime_density": r.mu_prime })).collect::<Vec<_>>(),
    });
    if source.ensemble == Ensemble::Wishart {
        json["c"] = json!(fmt(&source.c));
        json["cprime"] = json!(fmt(&source.cprime));
    }
    let table: Vec<Vec<String>> =
        rows.iter().map(|r| vec![r.x.to_string(), r.mu.to_string(), r.mu_prime.to_string()]).collect();
    let mut pretty = format!("support [{a}, {b}]\n{:>22} {:>22} {:>22}", "x", "mu_density", "mu_prime_density");
    for r in &rows {
        pretty.push_str(&format!("\n{:>22.15e} {:>22.15e} {:>22.15e}", r.x, r.mu, r.mu_prime));
    }
    Ok(Report::new(json, pretty).with_table(vec!["x", "mu_density", "mu_prime_density"], table))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    ensemble: Ensemble,
    k: usize,
    size: Option<usize>,
    rows: Option<usize>,
    ladder: Option<Vec<u64>>,
    shape: Option<(u64, u64)>,
    samples: usize,
    seed: u64,
    caps: &Caps,
) -> Result<Report, CliError> {
    let name = match ensemble {
        Ensemble::Goe => "goe",
        Ensemble::Wishart => "wishart",
    };
    if let Some(ladder) = ladder {
        let sizes: Vec<usize> = ladder.iter().map(|&n| n as usize).collect();
        let (sampler, limit) = match ensemble {
            Ensemble::Goe => (Sampler::Goe, goe_moment_poly(k, caps).map_err(core)?.coeff_inv(0)),
            Ensemble::Wishart => {
                let (c, cp) = shape.ok_or_else(|| CliError::Usage("a Wishart ladder needs --c and --cprime".into()))?;
                let limit = wishart_limits(&Word::power(0, k), &int(c as i64), &int(cp as i64)).0;
                (Sampler::Wishart { c, c_prime: cp }, limit)
            }
        };
        let est = infinitesimal_estimator(sampler, k, &sizes, samples, seed, Some(limit.to_f64())).map_err(core)?;
        let mut json = est.to_json();
        json["ensemble"] = json!(name);
        json["n"] = json!(k);
        json["ladder"] = json!(ladder);
        json["samples"] = json!(samples);
        json["seed"] = json!(seed);
        let table = est
            .per_size
            .iter()
            .map(|(n, e)| vec![n.to_string(), e.mean.to_string(), e.std_error.to_string()])
            .collect();
        let pretty = format!(
            "m = {} (exact limit)\nm′ ≈ {} ± {}",
            est.m, est.m_prime, est.m_prime_std_error
        );
        return Ok(Report::new(json, pretty).with_table(vec!["N", "estimate", "std_error"], table));
    }
    let n = size.expect("clap requires --N without --ladder");
    let (est, exact) = match ensemble {
        Ensemble::Goe => {
            let exact = goe_moment_poly(k, caps).map_err(core)?.eval_n(&int(n as i64));
            (goe_power_estimate(n, k, samples, seed).map_err(core)?, exact)
        }
        Ensemble::Wishart => {
            let m = rows.ok_or_else(|| CliError::Usage("Wishart sampling needs --M".into()))?;
            let poly = wishart_moment_poly(&Word::power(0, k), caps).map_err(core)?;
            let exact = poly.eval(&int(m as i64), &int(n as i64));
            (wishart_power_estimate(m, n, k, samples, seed).map_err(core)?, exact)
        }
    };
    let mut json = est.to_json();
    json["ensemble"] = json!(name);
    json["n"] = json!(k);
    json["N"] = json!(n);
    if let Some(m) = rows.filter(|_| ensemble == Ensemble::Wishart) {
        json["M"] = json!(m);
    }
    json["seed"] = json!(seed);
    let exact = exact.as_ref().map(Scalar::to_f64);
    json["exact"] = json!(exact);
    let mut pretty = format!("E tr(X^{k}) ≈ {} ± {} ({} samples)", est.mean, est.std_error, est.samples);
    if let Some(e) = exact {
        pretty.push_str(&format!("\nexact {e}"));
    }
    let table = vec![vec![n.to_string(), est.mean.to_string(), est.std_error.to_string()]];
    Ok(Report::new(json, pretty).with_table(vec!["N", "estimate", "std_error"], table))
}

fn key_value_rows(json: &Value, keys: &[&str]) -> Vec<Vec<String>> {
    keys.iter()
        .filter_map(|k| json.get(*k).map(|v| vec![k.to_string(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())]))
        .collect()
}

fn verify(check: VerifyCommand, caps: &Caps) -> Result<Report, CliError> {
    match check {
        VerifyCommand::UniversalRule { family, lambda, pattern, n, ladder } => {
            let ens = match family {
                Family::Rank1 => ConstantEnsemble::rank_one(vec![lambda]).map_err(core)?,
                Family::Tiled => {
                    let text = pattern.ok_or_else(|| CliError::Usage("the tiled family needs --pattern".into()))?;
                    ConstantEnsemble::tiled(vec![parse_exact_matrix(&text).map_err(core)?]).map_err(core)?
                }
            };
            let ladder = ladder.unwrap_or_else(|| UNIVERSAL_RULE_LADDER.to_vec());
            let report = verify_universal_rule(&ens, &vec![0; n], &ladder, caps).map_err(core)?;
            let json = report.to_json();
            let pretty = format!(
                "N⁻¹ coefficient {} vs rule {} ({} + {}): {}",
                fmt(&report.e1()),
                fmt(&report.rhs.total()),
                fmt(&report.rhs.derivative_part),
                fmt(&report.rhs.annular_part),
                if report.passed() { "agree" } else { "DISAGREE" }
            );
            let rows = key_value_rows(&json, &["n", "ensemble", "order_zero", "derivative_part", "annular_part", "rhs", "e1", "assumed_e0", "passed"]);
            Ok(Report::new(json, pretty).with_table(vec!["quantity", "value"], rows).with_status(report.passed()))
        }
        VerifyCommand::NonFreeness { n } => {
            let report = goe_non_freeness(n, caps).map_err(core)?;
            let non_free = !report.discrepancies().is_empty() || !report.mixed.is_free();
            let mut json = report.to_json();
            json["n"] = json!(n);
            json["non_free"] = json!(non_free);
            let rows: Vec<Vec<String>> = report
                .observed
                .iter()
                .zip(&report.free_prediction)
                .enumerate()
                .map(|(i, ((k, kp), (fk, fkp)))| vec![(i + 1).to_string(), fmt(k), fmt(kp), fmt(fk), fmt(fkp)])
                .collect();
            let pretty = rows
                .iter()
                .filter(|r| r[2] != "0" || r[4] != "0")
                .map(|r| format!("κ′{}(z) = {}, free prediction {}", r[0], r[2], r[4]))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Report::new(json, pretty)
                .with_table(vec!["n", "kappa", "kappa_prime", "free_kappa", "free_kappa_prime"], rows)
                .with_status(non_free))
        }
        VerifyCommand::WishartFreeness { c, cprime, n, colors } => {
            if c <= int(0) {
                return Err(CliError::Usage("--c must be positive".into()));
            }
            let f = wishart_limit_functional(colors, n, &c, &cprime, caps).map_err(core)?;
            let mismatches: Vec<String> = f
                .iter()
                .filter(|(w, v)| wishart_limits(w, &c, &cprime) != (v.re.clone(), v.eps.clone()))
                .map(|(w, _)| w.to_string())
                .collect();
            let groups: Vec<Vec<usize>> = (0..colors).map(|v| vec![v]).collect();
            let report = check_inf_freeness(&f, &groups, 0.0).map_err(core)?;
            let ok = mismatches.is_empty() && report.is_free();
            let nonzero: Vec<Value> = report
                .nonzero_mixed
                .iter()
                .map(|(w, d)| json!({ "word": w.to_string(), "kappa": fmt(&d.re), "kappa_prime": fmt(&d.eps) }))
                .collect();
            let json = json!({
                "c": fmt(&c),
                "cprime": fmt(&cprime),
                "n": n,
                "colors": colors,
                "words": f.words().count(),
                "limit_mismatches": mismatches,
                "mixed_checked": report.checked,
                "mixed_nonzero": nonzero,
                "free": ok,
            });
            let pretty = format!(
                "{} words, {} limit mismatches, {} mixed cumulants checked, {} nonzero",
                f.words().count(),
                mismatches.len(),
                report.checked,
                report.nonzero_mixed.len()
            );
            let rows = key_value_rows(&json, &["c", "cprime", "n", "colors", "words", "mixed_checked", "free"]);
            Ok(Report::new(json, pretty).with_table(vec!["quantity", "value"], rows).with_status(ok))
        }
    }
}
