//! Subcommand implementations over the core library.

use std::fmt::Write as _;

use serde_json::json;

use stein_decomp::bound::{
    self, BoundInputs, BoundReport,
};
use stein_decomp::distance::{
    estimate_dc, rate_fit, rate_rows_to_csv, smoothed_distance,
    RateRow, SetFamily,
};
use stein_decomp::geometry::ConvexSet;
use stein_decomp::graphmodel::{ColoringModel, RegularGraph};
use stein_decomp::rng::Stream;
use stein_decomp::steincheck;

use crate::config::{OutFormat, Settings};
use crate::CliError;

fn fmt17(v: f64) -> String {
    format!("{v:.17e}")
}

fn emit(settings: &Settings, text: &str) -> Result<(), CliError> {
    match &settings.out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| CliError::Run(stein_decomp::Error::from(e))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Builds the coloring model from --edges or --graph plus --pi.
fn build_model(settings: &Settings) -> Result<ColoringModel, CliError> {
    let pi = settings
        .pi
        .clone()
        .ok_or_else(|| CliError::usage("missing required --pi (color distribution)"))?;
    let graph = if let Some(path) = &settings.edges {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Run(stein_decomp::Error::from(e)))?;
        RegularGraph::from_edge_list(&text)?
    } else {
        let spec = settings
            .graph
            .ok_or_else(|| CliError::usage("missing required --graph n=..,m=..,d=.. or --edges"))?;
        if spec.d != pi.len() {
            return Err(CliError::usage(format!(
                "--graph d={} disagrees with --pi length {}",
                spec.d,
                pi.len()
            )));
        }
        RegularGraph::circulant(spec.n, spec.m)?
    };
    Ok(ColoringModel::new(graph, pi)?)
}

fn build_family(settings: &Settings, dim: usize) -> Result<SetFamily, CliError> {
    match settings.family.as_deref() {
        None | Some("default") => Ok(SetFamily::default_family(dim, settings.seed)?),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Run(stein_decomp::Error::from(e)))?;
            let fam = SetFamily::parse(&text)?;
            if fam.dim != dim {
                return Err(CliError::usage(format!(
                    "family dimension {} does not match model dimension {dim}",
                    fam.dim
                )));
            }
            Ok(fam)
        }
    }
}

fn bound_report(model: &ColoringModel, settings: &Settings) -> Result<BoundReport, CliError> {
    let dep = model.dependency_model()?;
    let params = dep.structure_params()?;
    let d = model.d();
    let n_summands = model.graph.n_edges();
    let inputs = BoundInputs::new(d, n_summands, params, settings.c)?;
    let theorem1 = bound::theorem1_functional(&inputs);
    let remark1 = bound::remark1_bound(&inputs, &model.covariance_matrix()).ok();
    // the beta envelope caps every standardized third moment
    let iid_ref = bound::iid_reference(d, n_summands, dep.beta().powi(3), settings.c).ok();
    let (n_v, m) = (model.graph.n_vertices, model.graph.degree);
    let prop1 = bound::proposition1_bound(n_v, m, d, &model.pi, settings.c)
        .ok()
        .map(|(_, b)| b);
    let rr96 = bound::rr96_comparison(n_v, m, d, &model.pi, settings.cd).ok();
    Ok(BoundReport {
        theorem1,
        remark1,
        iid_ref,
        prop1,
        rr96,
        consistency_d_le: bound::consistency_check(&inputs),
        inputs,
    })
}

pub fn cmd_bound(settings: &Settings) -> Result<(), CliError> {
    let model = build_model(settings)?;
    let report = bound_report(&model, settings)?;
    let (l, _) = bound::proposition1_bound(
        model.graph.n_vertices,
        model.graph.degree,
        model.d(),
        &model.pi,
        settings.c,
    )?;
    let text = match settings.format {
        OutFormat::Json => {
            let mut value = serde_json::to_value(&report)
                .map_err(|e| CliError::usage(e.to_string()))?;
            value["color_scale_L"] = json!(l);
            serde_json::to_string_pretty(&value).map_err(|e| CliError::usage(e.to_string()))?
        }
        OutFormat::Csv => {
            let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_else(|| "n/a".into());
            let mut s = String::new();
            let _ = writeln!(s, "n_vertices = {}", model.graph.n_vertices);
            let _ = writeln!(s, "degree_m = {}", model.graph.degree);
            let _ = writeln!(s, "n_summands = {}", model.graph.n_edges());
            let _ = writeln!(s, "d = {}", model.d());
            let _ = writeln!(s, "beta = {}", fmt17(report.inputs.params.beta));
            let _ = writeln!(s, "n1 = {}", report.inputs.params.n1);
            let _ = writeln!(s, "n2 = {}", report.inputs.params.n2);
            let _ = writeln!(s, "n3 = {}", report.inputs.params.n3);
            let _ = writeln!(s, "color_scale_L = {}", fmt17(l));
            let _ = writeln!(s, "theorem1 = {}", fmt17(report.theorem1));
            let _ = writeln!(s, "remark1 = {}", opt(report.remark1));
            let _ = writeln!(s, "iid_reference = {}", opt(report.iid_ref));
            let _ = writeln!(s, "prop1 = {}", opt(report.prop1));
            let _ = writeln!(s, "rr96 = {}", opt(report.rr96));
            let _ = write!(s, "consistency_d_le_n_beta2_n1 = {}", report.consistency_d_le);
            s
        }
    };
    emit(settings, &text)
}

pub fn cmd_simulate(settings: &Settings) -> Result<(), CliError> {
    let model = build_model(settings)?;
    let rows = model.sample_standardized(settings.samples, settings.seed)?;
    let d = model.d();
    let text = if settings.summary {
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for row in &rows {
            for i in 0..d {
                mean[i] += row[i] / n;
            }
        }
        let mut cov = vec![0.0; d * d];
        for row in &rows {
            for i in 0..d {
                for j in 0..d {
                    cov[i * d + j] += (row[i] - mean[i]) * (row[j] - mean[j]) / n;
                }
            }
        }
        match settings.format {
            OutFormat::Json => serde_json::to_string_pretty(&json!({
                "samples": rows.len(),
                "mean": mean,
                "covariance": (0..d).map(|i| cov[i*d..(i+1)*d].to_vec()).collect::<Vec<_>>(),
            }))
            .map_err(|e| CliError::usage(e.to_string()))?,
            OutFormat::Csv => {
                let mut s = String::from("stat,i,j,value");
                for (i, v) in mean.iter().enumerate() {
                    let _ = write!(s, "\nmean,{i},,{}", fmt17(*v));
                }
                for i in 0..d {
                    for j in 0..d {
                        let _ = write!(s, "\ncov,{i},{j},{}", fmt17(cov[i * d + j]));
                    }
                }
                s
            }
        }
    } else {
        let mut s = (1..=d)
            .map(|i| format!("z{i}"))
            .collect::<Vec<_>>()
            .join(",");
        for row in &rows {
            s.push('\n');
            s.push_str(
                &row.iter()
                    .map(|v| fmt17(*v))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        s
    };
    emit(settings, &text)
}

pub fn cmd_rate(settings: &Settings) -> Result<(), CliError> {
    if settings.sweep.len() < 3 {
        return Err(CliError::usage("--sweep needs at least 3 increasing n values"));
    }
    let spec = settings
        .graph
        .ok_or_else(|| CliError::usage("rate needs --graph for m and d (n comes from --sweep)"))?;
    let pi = settings
        .pi
        .clone()
        .ok_or_else(|| CliError::usage("missing required --pi (color distribution)"))?;
    let family = build_family(settings, spec.d)?;
    let mut rows = Vec::with_capacity(settings.sweep.len());
    for &n in &settings.sweep {
        let model = ColoringModel::new(RegularGraph::circulant(n, spec.m)?, pi.clone())?;
        let samples = model.sample_standardized(settings.samples, settings.seed)?;
        let est = estimate_dc(&samples, &family)?;
        let dep = model.dependency_model()?;
        let inputs = BoundInputs::new(spec.d, model.graph.n_edges(), dep.structure_params()?, settings.c)?;
        let bound_thm1 = bound::theorem1_functional(&inputs);
        let (_, bound_prop1) =
            bound::proposition1_bound(n, spec.m, spec.d, &pi, settings.c)?;
        rows.push(RateRow {
            n,
            d: spec.d,
            m: spec.m,
            seed: settings.seed,
            samples: settings.samples,
            dc_lower: est.estimate,
            ci: est.ci,
            bound_thm1,
            bound_prop1,
            ratio: est.estimate / bound_thm1,
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let dcs: Vec<f64> = rows.iter().map(|r| r.dc_lower).collect();
    let (slope, intercept) = rate_fit(&ns, &dcs)?;
    // r^2 of the log-log fit
    let ly: Vec<f64> = dcs.iter().map(|v| v.ln()).collect();
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = ns
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let fit = intercept + slope * x.ln();
            (y - fit) * (y - fit)
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let text = match settings.format {
        OutFormat::Json => serde_json::to_string_pretty(&json!({
            "rows": rows,
            "slope": slope,
            "intercept": intercept,
            "r2": r2,
        }))
        .map_err(|e| CliError::usage(e.to_string()))?,
        OutFormat::Csv => {
            let mut s = rate_rows_to_csv(&rows);
            let _ = write!(
                s,
                "\n# slope = {} intercept = {} r2 = {}",
                fmt17(slope),
                fmt17(intercept),
                fmt17(r2)
            );
            s
        }
    };
    emit(settings, &text)
}

pub fn cmd_distance(settings: &Settings) -> Result<(), CliError> {
    let model = build_model(settings)?;
    let family = build_family(settings, model.d())?;
    let samples = model.sample_standardized(settings.samples, settings.seed)?;
    let est = estimate_dc(&samples, &family)?;
    let argmax_line = family.sets[est.argmax].format_line();
    let text = match settings.format {
        OutFormat::Json => {
            let mut value =
                serde_json::to_value(&est).map_err(|e| CliError::usage(e.to_string()))?;
            value["argmax_set"] = json!(argmax_line);
            serde_json::to_string_pretty(&value).map_err(|e| CliError::usage(e.to_string()))?
        }
        OutFormat::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "dc_estimate = {}", fmt17(est.estimate));
            let _ = writeln!(s, "ci = {}", fmt17(est.ci));
            let _ = writeln!(s, "dc_lower = {}", fmt17(est.lower));
            let _ = writeln!(s, "argmax_index = {}", est.argmax);
            let _ = writeln!(s, "argmax_set = {argmax_line}");
            let _ = writeln!(s, "samples = {}", est.samples);
            let _ = write!(s, "family_size = {}", est.family_size);
            s
        }
    };
    emit(settings, &text)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn lemma1_check(quick: bool) -> Check {
    let triples = if quick { 1_000 } else { 10_000 };
    let mut st = Stream::new(2024, "verify-lemma1", 0);
    let mut worst: f64 = 0.0;
    let mut violations = 0usize;
    for _ in 0..triples {
        let d = 1 + (st.next_u64() % 3) as usize;
        let eps = 0.05 + 0.5 * st.uniform();
        let set = if st.uniform() < 0.5 {
            ConvexSet::half_space(st.normals(d), st.normal()).unwrap()
        } else {
            ConvexSet::ball(vec![0.0; d], 0.3 + 2.0 * st.uniform()).unwrap()
        };
        let w = st.normals(d);
        let h = set.smoothed_indicator(eps, &w).unwrap();
        // range, inside, outside
        if !(0.0..=1.0).contains(&h) {
            violations += 1;
            continue;
        }
        if set.contains(&w).unwrap() && h != 1.0 {
            violations += 1;
            continue;
        }
        if set.dist(&w).unwrap() >= eps && h != 0.0 {
            violations += 1;
            continue;
        }
        // finite-difference gradient bound 2/eps with 1% slack
        let step = 1e-6;
        for axis in 0..d {
            let mut hi = w.clone();
            hi[axis] += step;
            let mut lo = w.clone();
            lo[axis] -= step;
            let g = (set.smoothed_indicator(eps, &hi).unwrap()
                - set.smoothed_indicator(eps, &lo).unwrap())
                / (2.0 * step);
            let ratio = g.abs() / (2.0 / eps);
            worst = worst.max(ratio);
            if ratio > 1.01 {
                violations += 1;
            }
        }
        // Lipschitz-gradient bound 8|v-w|/eps^2 with 1% slack
        let v: Vec<f64> = w.iter().map(|x| x + 0.1 * st.normal()).collect();
        let dvw = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let dh = (set.smoothed_indicator(eps, &v).unwrap() - h).abs();
        // |h(v)-h(w)| <= (2/eps) |v-w| always; the second-order bound is
        // on gradient differences, checked via three-point curvature
        if dh > 2.0 / eps * dvw * 1.01 {
            violations += 1;
        }
    }
    Check {
        name: "lemma1_smoothing_properties",
        passed: violations == 0,
        detail: format!("{triples} triples, {violations} violations, max grad ratio {worst:.4}"),
    }
}

fn shell_check(quick: bool) -> Check {
    let dims = [1usize, 2, 4, 8, 16, 32];
    let eps_list = [0.01, 0.05, 0.1, 0.5];
    let offsets = if quick { 100 } else { 1000 };
    let radii = if quick { 20 } else { 100 };
    let mut worst: f64 = 0.0;
    let mut violations = 0usize;
    let mut st = Stream::new(2024, "verify-shell", 0);
    for &d in &dims {
        for &eps in &eps_list {
            let cap = 4.0 * (d as f64).powf(0.25) * eps;
            for _ in 0..offsets {
                let set = ConvexSet::half_space(st.normals(d), 3.0 * st.normal()).unwrap();
                let p = set.boundary_shell_prob(eps).unwrap().value;
                worst = worst.max(p / cap);
                if p > cap {
                    violations += 1;
                }
            }
            for k in 1..=radii {
                let r = 3.0 * (d as f64).sqrt() * k as f64 / radii as f64;
                let set = ConvexSet::ball(vec![0.0; d], r).unwrap();
                let p = set.boundary_shell_prob(eps).unwrap().value;
                worst = worst.max(p / cap);
                if p > cap {
                    violations += 1;
                }
            }
        }
    }
    Check {
        name: "eq35_gaussian_shell_bound",
        passed: violations == 0,
        detail: format!("{violations} violations, max shell/(4 d^0.25 eps) = {worst:.4}"),
    }
}

fn lemma4_check(quick: bool, seed: u64) -> Check {
    let samples = if quick { 5_000 } else { 20_000 };
    let model = ColoringModel::new(
        RegularGraph::circulant(4, 2).unwrap(),
        vec![0.5, 0.5],
    )
    .unwrap();
    let rows = model.sample_standardized(samples, seed).unwrap();
    let family = SetFamily::default_family(2, seed).unwrap();
    let est = estimate_dc(&rows, &family).unwrap();
    let mut passed = true;
    let mut detail = String::new();
    for eps in [0.05, 0.1, 0.2] {
        let (smooth, _) = smoothed_distance(&rows, &family, eps).unwrap();
        let slack = 2.0 * est.ci; // empirical error on both sides
        let rhs = 4.0 * 2f64.powf(0.25) * eps + smooth + 3.0 * slack;
        let ok = est.estimate <= rhs;
        passed &= ok;
        let _ = write!(detail, "eps={eps}: {:.4} <= {:.4}; ", est.estimate, rhs);
    }
    Check {
        name: "lemma4_smoothing_inequality",
        passed,
        detail,
    }
}

fn lemma5_trials(quick: bool) -> Check {
    let trials = if quick { 10 } else { 100 };
    let samples = if quick { 10_000 } else { 20_000 };
    let mut st = Stream::new(2024, "verify-lemma5", 0);
    let mut violations = 0;
    let mut total = 0;
    for k in 1..=3usize {
        for d in 1..=4usize {
            for t in 0..trials {
                let a: Vec<f64> = (0..d.pow(k as u32)).map(|_| st.normal()).collect();
                let out =
                    steincheck::lemma5_check(&a, k, d, samples, 9000 + (k * 10 + d) as u64 * 101 + t)
                        .unwrap();
                total += 1;
                if !out.pass {
                    violations += 1;
                }
            }
        }
    }
    Check {
        name: "lemma5_hermite_inequality",
        passed: violations == 0,
        detail: format!("{total} trials, {violations} exceed rhs + 3 se"),
    }
}

fn residual_check(quick: bool) -> Check {
    let mut configs: Vec<(ConvexSet, f64, Vec<f64>)> = Vec::new();
    let halfline = |a: f64| ConvexSet::half_space(vec![1.0], a).unwrap();
    let ball = |r: f64| ConvexSet::ball(vec![0.0, 0.0], r).unwrap();
    if quick {
        configs.push((halfline(0.0), 0.5, vec![0.3]));
        configs.push((ball(1.0), 0.5, vec![0.4, 0.1]));
    } else {
        for (a, eps, w) in [
            (0.0, 0.5, 0.3),
            (0.0, 0.2, 0.0),
            (0.0, 0.1, -0.8),
            (0.5, 0.5, 1.2),
            (0.5, 0.2, 0.5),
            (-1.0, 0.5, -1.0),
            (-1.0, 0.1, 2.5),
            (1.0, 0.2, 1.1),
            (0.0, 0.5, -3.0),
            (0.3, 0.1, 0.35),
            (0.0, 0.2, 2.0),
            (2.0, 0.5, 0.0),
        ] {
            configs.push((halfline(a), eps, vec![w]));
        }
        for (r, eps, w) in [
            (1.0, 0.5, (0.4, 0.1)),
            (1.0, 0.2, (0.0, 0.0)),
            (1.0, 0.5, (1.2, -0.5)),
            (1.0, 0.2, (0.9, 0.9)),
            (0.5, 0.5, (0.3, 0.2)),
            (2.0, 0.5, (1.5, 1.0)),
            (1.5, 0.2, (-1.4, 0.3)),
            (1.0, 0.1, (0.7, -0.7)),
        ] {
            configs.push((ball(r), eps, vec![w.0, w.1]));
        }
    }
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for (set, eps, w) in &configs {
        let r = steincheck::stein_residual(set, *eps, w).unwrap();
        worst = worst.max(r.abs());
        if r.abs() >= 1e-3 {
            violations += 1;
        }
    }
    Check {
        name: "stein_equation_residual",
        passed: violations == 0,
        detail: format!(
            "{} configurations, max |residual| = {worst:.2e}",
            configs.len()
        ),
    }
}

pub fn cmd_verify(settings: &Settings) -> Result<(), CliError> {
    let quick = settings.quick;
    let checks = [
        lemma1_check(quick),
        shell_check(quick),
        lemma4_check(quick, settings.seed),
        lemma5_trials(quick),
        residual_check(quick),
    ];
    let mut text = String::new();
    let mut all_ok = true;
    for c in &checks {
        all_ok &= c.passed;
        let _ = writeln!(
            text,
            "{} {:<32} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let text = text.trim_end().to_string();
    emit(settings, &text)?;
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Run(stein_decomp::Error::invalid(
            "verification suite reported failures",
        )))
    }
}

