use rayon::prelude::*;
use serde_json::{json, Map, Value};

use hilmod::bundle::DEFAULT_FRAME_TERMS;
use hilmod::bundle::{line_curvature_with_step, CurvatureOptions};
use hilmod::kernel::{DEFAULT_MARGIN, DEFAULT_TERMS};
use hilmod::wirtinger::DEFAULT_STEP;
use hilmod::{
    bundle_curvature_with, char_function_variant, hilbert_samuel, kernel_eval, metric_h,
    power_frame, power_frame_via_roots, quasi_similarity_ratio, quotient_dim,
    reducing_curvatures_at, shift_kernel_metric, unitarily_equivalent, vanishing_submodule,
    CharFnVariant, CurvatureMethod, DomainShape, Equivalence, FiniteContraction, KernelSpec,
    LatticeVerdict, LineMethod, PointInDomain, RadialMetric, TruncatedModule, C64,
};

use crate::grid::{Grid, DEFAULT_MARGIN as GRID_MARGIN};
use crate::output::{resolve_precision, Numbers, Report, Table};
use crate::{
    parse, AnalyzeArgs, BundleArgs, BundleMethodArg, CharfnArgs, CliError, Command, CurvatureCmd,
    FrameArg, HsArgs, HsCmd, KernelCmd, KernelEvalArgs, LineArgs, LineMethodArg, LocalizeCmd,
    ModuleArgs, OutputArgs, PointArgs, RatioArgs, ReduceArgs, ShiftCmd, SimilarArgs, SpaceArgs,
    VariantArg,
};

type Res<T> = Result<T, CliError>;

pub fn dispatch(cmd: Command) -> Res<(Report, OutputArgs)> {
    match cmd {
        Command::Kernel {
            cmd: KernelCmd::Eval(a),
        } => kernel(a),
        Command::Curvature {
            cmd: CurvatureCmd::Line(a),
        } => line(a),
        Command::Curvature {
            cmd: CurvatureCmd::Bundle(a),
        } => bundle(a),
        Command::Shift {
            cmd: ShiftCmd::Analyze(a),
        } => analyze(a),
        Command::Shift {
            cmd: ShiftCmd::Similar(a),
        } => similar(a),
        Command::Reduce(a) => reduce(a),
        Command::Localize {
            cmd: LocalizeCmd::Dim(a),
        } => localize(a),
        Command::Hs { cmd: HsCmd::Fit(a) } => hs_fit(a),
        Command::Charfn(a) => charfn(a),
        Command::Ratio(a) => ratio(a),
    }
}

fn numbers(out: &OutputArgs) -> Res<Numbers> {
    Ok(Numbers {
        digits: resolve_precision(out.precision)?,
    })
}

fn spec(s: &SpaceArgs) -> Res<KernelSpec> {
    parse::family(&s.family, s.alpha, s.n, s.moments.as_deref())
}

enum Points {
    Single(C64),
    Grid(Vec<C64>),
}

impl Points {
    fn list(&self) -> Vec<C64> {
        match self {
            Points::Single(z) => vec![*z],
            Points::Grid(v) => v.clone(),
        }
    }
}

fn check_margin(margin: Option<f64>) -> Res<()> {
    match margin {
        Some(d) if !(d > 0.0 && d < 0.5) => {
            Err(CliError::Usage(format!("margin {d} outside (0, 0.5)")))
        }
        _ => Ok(()),
    }
}

fn points(p: &PointArgs) -> Res<Points> {
    check_margin(p.margin)?;
    match (&p.omega, p.grid) {
        (_, Some(kind)) => Ok(Points::Grid(
            Grid::new(kind, p.resolution, p.margin.unwrap_or(GRID_MARGIN))?.points(),
        )),
        (Some(s), None) => Ok(Points::Single(parse::complex(s).map_err(CliError::Usage)?)),
        (None, None) => Err(CliError::Usage("give --omega or --grid".into())),
    }
}

/// Evaluates `f` at every point in parallel; results (and the first error)
/// come back in grid order.
fn sweep<T, F>(pts: &[C64], f: F) -> Res<Vec<T>>
where
    T: Send,
    F: Fn(C64) -> Result<T, hilmod::Error> + Sync,
{
    let results: Vec<_> = pts.par_iter().map(|&z| f(z)).collect();
    Ok(results.into_iter().collect::<Result<Vec<_>, _>>()?)
}

/// One object and one CSV row per point. A single point gives a bare object
/// and, when `text` is set, a plain rendering.
fn point_report(
    single: bool,
    header: Vec<String>,
    items: Vec<(Map<String, Value>, Vec<String>)>,
    text: Option<String>,
) -> Report {
    let mut table = Table::new(header);
    let mut objects = Vec::with_capacity(items.len());
    for (obj, row) in items {
        objects.push(Value::Object(obj));
        table.push(row);
    }
    let json = if single {
        objects.pop().unwrap_or(Value::Null)
    } else {
        Value::Array(objects)
    };
    Report {
        json,
        table,
        scalar: single && text.is_some(),
        text: if single { text } else { None },
        indeterminate: false,
    }
}

fn pair(n: &Numbers, z: C64) -> Value {
    json!([n.json(z.re), n.json(z.im)])
}

fn omega_fields(n: &Numbers, z: C64) -> (Map<String, Value>, Vec<String>) {
    let mut m = Map::new();
    m.insert("omega".into(), pair(n, z));
    (m, vec![n.text(z.re), n.text(z.im)])
}

/// Series length for a point of modulus `radius`: enough that `radius^n`
/// is far below double precision, and never less than `base`.
fn auto_terms(base: usize, radius: f64) -> usize {
    if radius <= 0.0 {
        return base;
    }
    let needed = (45.0 / -radius.ln()).ceil();
    if needed.is_finite() {
        base.max(needed as usize)
    } else {
        base
    }
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn kernel(a: KernelEvalArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    let spec = spec(&a.space)?;
    let vars = spec.vars();
    check_margin(a.margin)?;
    let value_cells = |v: &hilmod::KernelValue| {
        vec![n.text(v.value.re), n.text(v.value.im), n.text(v.tail_bound)]
    };
    let report = if let Some(kind) = a.grid {
        let margin = a.margin.unwrap_or(GRID_MARGIN);
        let pts = Grid::new(kind, a.resolution, margin)?.points();
        // the diagonal embedding keeps |p| = |ω| on the ball and polydisk
        let scale = match spec.shape() {
            DomainShape::Ball => 1.0 / (vars as f64).sqrt(),
            _ => 1.0,
        };
        let values = sweep(&pts, |z| {
            let p = PointInDomain::new(vec![z * scale; vars], margin)?;
            kernel_eval(
                &spec,
                &p,
                &p,
                a.terms
                    .unwrap_or_else(|| auto_terms(DEFAULT_TERMS, z.norm())),
            )
        })?;
        let items = pts
            .iter()
            .zip(&values)
            .map(|(&z, v)| {
                let (mut obj, mut row) = omega_fields(&n, z);
                obj.insert("value".into(), pair(&n, v.value));
                obj.insert("tail_bound".into(), n.json(v.tail_bound));
                row.extend(value_cells(v));
                (obj, row)
            })
            .collect();
        point_report(
            false,
            strs(&["re_omega", "im_omega", "re_k", "im_k", "tail_bound"]),
            items,
            None,
        )
    } else {
        let zs =
            a.z.as_deref()
                .ok_or_else(|| CliError::Usage("give --z (and --w) or --grid".into()))?;
        let z = parse::point(zs, vars)?;
        let w = match &a.w {
            Some(ws) => parse::point(ws, vars)?,
            None => z.clone(),
        };
        let margin = a.margin.unwrap_or(DEFAULT_MARGIN);
        let pz = PointInDomain::new(z.clone(), margin)?;
        let pw = PointInDomain::new(w.clone(), margin)?;
        let radius = pz.norm(spec.shape()).max(pw.norm(spec.shape()));
        let v = kernel_eval(
            &spec,
            &pz,
            &pw,
            a.terms.unwrap_or_else(|| auto_terms(DEFAULT_TERMS, radius)),
        )?;
        let mut header = Vec::new();
        let mut row = Vec::new();
        for (name, coords) in [("z", &z), ("w", &w)] {
            for (i, c) in coords.iter().enumerate() {
                header.push(format!("re_{name}{}", i + 1));
                header.push(format!("im_{name}{}", i + 1));
                row.push(n.text(c.re));
                row.push(n.text(c.im));
            }
        }
        header.extend(strs(&["re_k", "im_k", "tail_bound"]));
        row.extend(value_cells(&v));
        let coords = |c: &[C64]| Value::Array(c.iter().map(|&x| pair(&n, x)).collect());
        let mut obj = Map::new();
        obj.insert("z".into(), coords(&z));
        obj.insert("w".into(), coords(&w));
        obj.insert("value".into(), pair(&n, v.value));
        obj.insert("tail_bound".into(), n.json(v.tail_bound));
        let text = n.complex_text(v.value.re, v.value.im);
        point_report(true, header, vec![(obj, row)], Some(text))
    };
    Ok((report, a.out))
}

fn line_metric(s: &SpaceArgs, spec: &KernelSpec, terms: usize) -> Res<RadialMetric> {
    Ok(match s.family.as_str() {
        "hardy" | "hardy-disk" => RadialMetric::hardy(),
        "bergman" => RadialMetric::weighted_bergman(0.0)?,
        "weighted-bergman" => RadialMetric::weighted_bergman(s.alpha)?,
        _ if spec.vars() == 1 => {
            let coeffs = (0..terms as u32)
                .map(|j| spec.moments().get(&[j]).map(|mu| 1.0 / mu))
                .collect::<Result<Vec<_>, _>>()?;
            RadialMetric::series(coeffs)?
        }
        _ => {
            return Err(CliError::Usage(format!(
                "line curvature needs a single-variable family, {} has {}",
                s.family,
                spec.vars()
            )))
        }
    })
}

fn line(a: LineArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    let spec = spec(&a.space)?;
    let pts = points(&a.point)?;
    let reach = pts.list().iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let terms = a
        .terms
        .unwrap_or_else(|| auto_terms(DEFAULT_FRAME_TERMS, reach));
    let g = line_metric(&a.space, &spec, terms)?;
    let method = match a.method {
        Some(LineMethodArg::Series) => LineMethod::Series,
        Some(LineMethodArg::Fd) => LineMethod::FiniteDifference,
        Some(LineMethodArg::Closed) => LineMethod::ClosedForm,
        None => match g {
            RadialMetric::Closed(_) => LineMethod::ClosedForm,
            RadialMetric::Series(_) => LineMethod::Series,
        },
    };
    let step = a.step.unwrap_or(DEFAULT_STEP);
    let values = sweep(&pts.list(), |w| {
        let k = line_curvature_with_step(&g, w, method, step)?;
        let h = metric_h(&g, w)?;
        Ok((w, k, h))
    })?;
    let single = matches!(pts, Points::Single(_));
    let text = values.first().map(|&(_, k, _)| n.text(k));
    let items = values
        .iter()
        .map(|&(w, k, h)| {
            let (mut obj, mut row) = omega_fields(&n, w);
            obj.insert("curvature".into(), n.json(k));
            obj.insert("h".into(), n.json(h));
            row.extend([n.text(k), n.text(h)]);
            (obj, row)
        })
        .collect();
    let report = point_report(
        single,
        strs(&["re_omega", "im_omega", "curvature", "h"]),
        items,
        text,
    );
    Ok((report, a.out))
}

fn verdict_name(v: LatticeVerdict) -> &'static str {
    match v {
        LatticeVerdict::FiniteDiscrete => "finite-discrete",
        LatticeVerdict::Indeterminate => "indeterminate",
    }
}

fn bundle(a: BundleArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    let spec = spec(&a.space)?;
    let frame = match a.frame {
        FrameArg::Power => power_frame(&spec, a.m)?,
        FrameArg::Roots => power_frame_via_roots(&spec, a.m, a.branch)?,
    };
    let method = match a.method {
        Some(BundleMethodArg::Fd) => CurvatureMethod::FiniteDifference,
        Some(BundleMethodArg::Exact) => CurvatureMethod::Exact,
        Some(BundleMethodArg::CrossChecked) => CurvatureMethod::CrossChecked,
        None if frame.is_diagonal_radial() => CurvatureMethod::Exact,
        None => CurvatureMethod::FiniteDifference,
    };
    let step = a.step.unwrap_or(DEFAULT_STEP);
    let pts = points(&a.point)?;
    let reports = sweep(&pts.list(), |w| {
        let opts = CurvatureOptions {
            // the stencil reaches a little beyond ω
            terms: a
                .terms
                .unwrap_or_else(|| auto_terms(DEFAULT_FRAME_TERMS, w.norm() + 2.0 * step)),
            step,
        };
        bundle_curvature_with(&frame, w, method, &opts)
    })?;
    let rank = frame.rank();
    let mut header = strs(&["re_omega", "im_omega"]);
    header.extend((1..=rank).map(|i| format!("eig_{i}")));
    header.push("verdict".into());
    let items = reports
        .iter()
        .map(|r| {
            let (mut obj, mut row) = omega_fields(&n, r.omega);
            let matrix: Vec<Value> = (0..r.matrix.nrows())
                .map(|i| {
                    Value::Array(
                        (0..r.matrix.ncols())
                            .map(|j| pair(&n, r.matrix[(i, j)]))
                            .collect(),
                    )
                })
                .collect();
            obj.insert("matrix".into(), Value::Array(matrix));
            obj.insert("eigenvalues".into(), n.json_vec(&r.eigenvalues));
            obj.insert("verdict".into(), json!(verdict_name(r.verdict)));
            row.extend(r.eigenvalues.iter().map(|&e| n.text(e)));
            row.push(verdict_name(r.verdict).into());
            (obj, row)
        })
        .collect();
    let report = point_report(matches!(pts, Points::Single(_)), header, items, None);
    Ok((report, a.out))
}

fn analyze(a: AnalyzeArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    if a.depth < 2 {
        return Err(CliError::Usage("--depth must be at least 2".into()));
    }
    let s = parse::shift(&a.shift, a.depth)?;
    let weights = (0..a.depth)
        .map(|l| {
            s.weight(l).ok_or_else(|| {
                CliError::Usage(format!(
                    "the shift has only {l} weights, --depth is {}",
                    a.depth
                ))
            })
        })
        .collect::<Res<Vec<f64>>>()?;
    let betas = s.betas(a.depth)?;
    let metric = shift_kernel_metric(&s, a.depth)?;
    let mut table = Table::new(["l", "weight", "beta", "metric_coeff"]);
    for l in 0..a.depth {
        table.push(vec![
            l.to_string(),
            n.text(weights[l]),
            n.text(betas[l]),
            n.text(metric[l]),
        ]);
    }
    let json = json!({
        "descriptor": s.descriptor(),
        "weights": n.json_vec(&weights),
        "betas": n.json_vec(&betas),
        "metric": n.json_vec(&metric),
        "sup_weight": n.json(s.sup_weight()),
        // g(r) = Σ a_ℓ r^ℓ gives K(0) = −a_1/a_0
        "curvature_at_origin": n.json(-metric[1] / metric[0]),
    });
    Ok((
        Report {
            json,
            table,
            text: None,
            scalar: false,
            indeterminate: false,
        },
        a.out,
    ))
}

fn equivalence_name(e: &Equivalence) -> &'static str {
    match e {
        Equivalence::UnitarilyEquivalent => "unitarily-equivalent",
        Equivalence::SimilarNotUnitary => "similar-not-unitary",
        Equivalence::NotSimilar => "not-similar",
        Equivalence::Inconclusive { .. } => "inconclusive",
    }
}

fn similar(a: SimilarArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    let source = parse::shift(&a.source, a.depth)?;
    let target = parse::shift(&a.target, a.depth)?;
    let v = unitarily_equivalent(&source, &target, a.depth, a.tol)?;
    let name = equivalence_name(&v.equivalence);
    let opt = |x: Option<f64>| x.map_or(Value::Null, |x| n.json(x));
    let json = json!({
        "verdict": name,
        "depth": a.depth,
        "bounds": [n.json(v.bounds.0), n.json(v.bounds.1)],
        "limit": opt(v.limit),
        "growth_exponent": opt(v.growth_exponent),
    });
    let mut table = Table::new(["l", "coefficient"]);
    for (l, c) in v.coefficients.iter().enumerate() {
        table.push(vec![l.to_string(), n.text(*c)]);
    }
    let indeterminate = matches!(v.equivalence, Equivalence::Inconclusive { .. });
    Ok((
        Report {
            json,
            table,
            text: Some(name.into()),
            scalar: false,
            indeterminate,
        },
        a.out,
    ))
}

fn reduce(a: ReduceArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    let spec = spec(&a.space)?;
    let at = parse::complex(&a.at).map_err(CliError::Usage)?;
    let r = reducing_curvatures_at(&spec, a.m, at)?;
    let json = json!({
        "curvatures": n.json_vec(&r.curvatures),
        "verdict": verdict_name(r.verdict),
    });
    let mut table = Table::new(["k", "curvature"]);
    for (k, c) in r.curvatures.iter().enumerate() {
        table.push(vec![k.to_string(), n.text(*c)]);
    }
    Ok((
        Report {
            json,
            table,
            text: Some(verdict_name(r.verdict).into()),
            scalar: false,
            indeterminate: r.verdict == LatticeVerdict::Indeterminate,
        },
        a.out,
    ))
}

/// The truncated module; without an explicit degree it reaches `room`
/// degrees above the generators.
fn module(
    space: &SpaceArgs,
    vanish: bool,
    degree: Option<u32>,
    room: u32,
    multiplicity: usize,
) -> Res<TruncatedModule> {
    let spec = spec(space)?;
    let vars = spec.vars();
    let generator = u32::from(vanish);
    let degree = degree.unwrap_or(room + generator);
    let m = if vanish {
        vanishing_submodule(&spec, vars, degree, &vec![C64::new(0.0, 0.0); vars])?
    } else {
        TruncatedModule::full(&spec, degree)?
    };
    Ok(if multiplicity == 1 {
        m
    } else {
        m.with_multiplicity(multiplicity)?
    })
}

fn localize(a: ModuleArgs) -> Res<(Report, OutputArgs)> {
    let m = module(
        &a.space,
        a.vanish_at_origin,
        a.degree,
        a.k + 2,
        a.multiplicity,
    )?;
    let at = parse::point(&a.at, m.vars())?;
    let q = quotient_dim(&m, &at, a.k)?;
    let mut table = Table::new(["k", "dim", "approximate"]);
    table.push(vec![
        a.k.to_string(),
        q.dim.to_string(),
        q.approximate.to_string(),
    ]);
    if q.approximate {
        eprintln!("hilmod: the dimension away from the origin depends on the truncation degree");
    }
    Ok((
        Report {
            json: json!({"dim": q.dim, "approximate": q.approximate}),
            table,
            text: Some(q.dim.to_string()),
            scalar: true,
            indeterminate: false,
        },
        a.out,
    ))
}

fn hs_fit(a: HsArgs) -> Res<(Report, OutputArgs)> {
    let k_max = u32::try_from(a.k_max).map_err(|_| CliError::Usage("--k-max too large".into()))?;
    let m = module(
        &a.space,
        a.vanish_at_origin,
        a.degree,
        k_max,
        a.multiplicity,
    )?;
    let at = parse::point(&a.at, m.vars())?;
    let fit = hilbert_samuel(&m, &at, a.k_max)?;
    let mut table = Table::new(["k", "dim"]);
    for (i, d) in fit.dims.iter().enumerate() {
        table.push(vec![(i + 1).to_string(), d.to_string()]);
    }
    let json = serde_json::to_value(fit.to_doc()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok((
        Report {
            json,
            table,
            text: Some(fit.poly_string()),
            scalar: false,
            indeterminate: false,
        },
        a.out,
    ))
}

fn charfn(a: CharfnArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    let t = FiniteContraction::new(parse::matrix(&parse::inline_or_file(&a.matrix)?)?)?;
    let variant = match a.variant {
        VariantArg::Standard => CharFnVariant::Standard,
        VariantArg::Printed => CharFnVariant::Printed,
    };
    let pts = points(&a.point)?;
    let samples = sweep(&pts.list(), |z| char_function_variant(&t, z, variant))?;
    let svs = samples.first().map_or(0, |s| s.singular_values.len());
    let mut header = strs(&["re_z", "im_z"]);
    header.extend((1..=svs).map(|i| format!("sv_{i}")));
    header.push("abs_det".into());
    let items = samples
        .iter()
        .map(|s| {
            let mut obj = Map::new();
            obj.insert("z".into(), pair(&n, s.z));
            let theta: Vec<Value> = (0..s.theta.nrows())
                .map(|i| {
                    Value::Array(
                        (0..s.theta.ncols())
                            .map(|j| pair(&n, s.theta[(i, j)]))
                            .collect(),
                    )
                })
                .collect();
            obj.insert("theta".into(), Value::Array(theta));
            obj.insert("singular_values".into(), n.json_vec(&s.singular_values));
            obj.insert(
                "abs_det".into(),
                s.abs_det.map_or(Value::Null, |d| n.json(d)),
            );
            let mut row = vec![n.text(s.z.re), n.text(s.z.im)];
            row.extend(s.singular_values.iter().map(|&x| n.text(x)));
            row.push(s.abs_det.map_or(String::new(), |d| n.text(d)));
            (obj, row)
        })
        .collect();
    let report = point_report(matches!(pts, Points::Single(_)), header, items, None);
    Ok((report, a.out))
}

fn ratio(a: RatioArgs) -> Res<(Report, OutputArgs)> {
    let n = numbers(&a.out)?;
    let pts = points(&a.point)?;
    let values = sweep(&pts.list(), |w| {
        Ok((w, quasi_similarity_ratio(a.alpha, a.beta, w)?))
    })?;
    let name = |v: hilmod::Obstruction| match v {
        hilmod::Obstruction::NoNonzeroMap => "no-nonzero-map",
        hilmod::Obstruction::Unobstructed => "unobstructed",
    };
    let text = values.first().map(|(_, q)| n.text(q.ratio));
    let items = values
        .iter()
        .map(|&(w, q)| {
            let (mut obj, mut row) = omega_fields(&n, w);
            obj.insert("ratio".into(), n.json(q.ratio));
            obj.insert("verdict".into(), json!(name(q.verdict)));
            row.extend([n.text(q.ratio), name(q.verdict).to_string()]);
            (obj, row)
        })
        .collect();
    let report = point_report(
        matches!(pts, Points::Single(_)),
        strs(&["re_omega", "im_omega", "ratio", "verdict"]),
        items,
        text,
    );
    Ok((report, a.out))
}
