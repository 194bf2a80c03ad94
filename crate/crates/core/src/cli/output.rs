//! Report rendering. JSON numbers carry 17 significant digits, CSV numbers
//! 12; non-finite values become `null` in JSON and `nan`/`inf` in CSV.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use super::{CliConfig, CommandKind, Format, EXIT_DEGENERATE, EXIT_DOMAIN, EXIT_FAIL, EXIT_OK};
use crate::linalg::Matrix;
use crate::verify::{analyze, sweep, SampleOutcome, SampleResult, Verdict, VerifyReport};
use crate::wronskian::FunctionSystem;

pub(super) struct Rendered {
    pub text: String,
    pub exit_code: i32,
}

/// Splits on commas that are not nested inside parentheses.
pub fn split_top_level(list: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in list.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current.clear();
                continue;
            }
            _ => {}
        }
        current.push(c);
    }
    parts.push(current.trim().to_string());
    parts
}

/// 17 significant digits in scientific notation, which round-trips any
/// `f64`.
pub fn format_json_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// `%.12g`-style rendering.
pub fn format_csv_number(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Pretty JSON whose floats use [`format_json_number`].
struct SigFigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFigFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_json_number(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn to_json_text(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON");
    let mut text = String::from_utf8(buf).expect("JSON is UTF-8");
    text.push('\n');
    text
}

fn num(x: f64) -> Value {
    Value::from(x)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn matrix(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| nums(m.row(i))).collect())
}

#[derive(Default)]
struct Counts {
    regular: usize,
    degenerate: usize,
    domain_errors: usize,
}

impl Counts {
    fn exit_code(&self, total: usize) -> i32 {
        if total > 0 && self.domain_errors == total {
            EXIT_DOMAIN
        } else if self.regular == 0 {
            EXIT_DEGENERATE
        } else {
            EXIT_OK
        }
    }

    fn json(&self) -> Value {
        json!({
            "regular": self.regular,
            "degenerate": self.degenerate,
            "domain_errors": self.domain_errors,
        })
    }
}

pub(super) fn render(config: &CliConfig, sys: &FunctionSystem) -> Rendered {
    if config.command == CommandKind::Verify {
        let report = sweep(sys, config.grid(), config.seed, &config.options())
            .expect("grid validated with the config");
        return render_verify(config, sys, &report);
    }
    let outcomes: Vec<SampleOutcome> = config
        .grid()
        .points()
        .into_iter()
        .map(|t| analyze(sys, t))
        .collect();
    let mut counts = Counts::default();
    for o in &outcomes {
        match o {
            SampleOutcome::Regular(_) => counts.regular += 1,
            SampleOutcome::Degenerate(_) => counts.degenerate += 1,
            SampleOutcome::Failed { .. } => counts.domain_errors += 1,
        }
    }
    let n = sys.n();
    let text = match config.format {
        Format::Json => {
            let samples: Vec<Value> = outcomes
                .iter()
                .map(|o| sample_json(config.command, o))
                .collect();
            to_json_text(&envelope(config, sys, samples, counts.json()))
        }
        Format::Csv => {
            let mut text = csv_header(config.command, n).join(",");
            text.push('\n');
            for o in &outcomes {
                text.push_str(&csv_row(config.command, n, o).join(","));
                text.push('\n');
            }
            text
        }
    };
    Rendered {
        text,
        exit_code: counts.exit_code(outcomes.len()),
    }
}

fn envelope(
    config: &CliConfig,
    sys: &FunctionSystem,
    samples: Vec<Value>,
    summary: Value,
) -> Value {
    json!({
        "command": config.command.name(),
        "n": sys.n(),
        "functions": config.funcs.iter().map(|f| f.trim()).collect::<Vec<_>>(),
        "grid": {
            "t0": num(config.t0),
            "t1": num(config.t1),
            "samples": config.samples,
            "seed": config.seed,
        },
        "samples": samples,
        "summary": summary,
    })
}

fn status(o: &SampleOutcome) -> &'static str {
    match o {
        SampleOutcome::Regular(_) => "ok",
        SampleOutcome::Degenerate(_) => "degenerate",
        SampleOutcome::Failed { .. } => "domain_error",
    }
}

fn outcome_t(o: &SampleOutcome) -> f64 {
    match o {
        SampleOutcome::Regular(a) => a.data.t,
        SampleOutcome::Degenerate(d) => d.t,
        SampleOutcome::Failed { t, .. } => *t,
    }
}

fn sample_json(command: CommandKind, o: &SampleOutcome) -> Value {
    let mut obj = json!({ "t": num(outcome_t(o)), "status": status(o) });
    let map = obj.as_object_mut().expect("object literal");
    match o {
        SampleOutcome::Failed { message, .. } => {
            map.insert("error".into(), Value::from(message.as_str()));
        }
        SampleOutcome::Degenerate(d) => {
            map.insert("w".into(), num(d.w));
        }
        SampleOutcome::Regular(a) => match command {
            CommandKind::Recover => {
                map.insert("p".into(), nums(&a.coefficients.p));
                map.insert("p_cramer".into(), nums(&a.coefficients.p_cramer));
                map.insert("cramer_discrepancy".into(), num(a.coefficients.discrepancy));
                map.insert("w".into(), num(a.data.w));
                map.insert("kappa".into(), num(a.data.kappa));
            }
            CommandKind::Cartan => {
                map.insert("R".into(), matrix(&a.cartan.r));
                map.insert("L".into(), matrix(&a.cartan.l));
                map.insert("q_desc".into(), nums(a.cartan.q_desc()));
                map.insert("q_desc_L".into(), nums(a.cartan.q_desc_l()));
                map.insert("p_hat".into(), nums(&a.cartan.p_hat));
                map.insert("kappa".into(), num(a.data.kappa));
            }
            CommandKind::ProbeAbel => {
                let p = &a.probe;
                map.insert("det_Wprime".into(), num(p.det_wprime));
                map.insert("ddet_W".into(), num(p.ddet_w));
                map.insert("w".into(), num(p.w));
                map.insert("trace_R".into(), num(p.trace_r));
                map.insert("det_R".into(), num(p.det_r));
                map.insert("p1".into(), num(p.p1));
                map.insert("pn".into(), num(p.pn));
            }
            CommandKind::Verify => unreachable!("verify renders from its report"),
        },
    }
    obj
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

fn csv_header(command: CommandKind, n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    match command {
        CommandKind::Recover => h.extend(indexed("p", n)),
        CommandKind::Cartan => {
            for m in ["R", "L"] {
                for i in 1..=n {
                    h.extend((1..=n).map(|j| format!("{m}_{i}_{j}")));
                }
            }
            h.extend(indexed("q", n));
        }
        CommandKind::ProbeAbel => h.extend(
            ["det_Wprime", "ddet_W", "trace_R", "det_R", "p_1", "p_n"]
                .iter()
                .map(|s| s.to_string()),
        ),
        CommandKind::Verify => unreachable!("verify renders from its report"),
    }
    h
}

fn csv_row(command: CommandKind, n: usize, o: &SampleOutcome) -> Vec<String> {
    let width = csv_header(command, n).len() - 1;
    let mut row = vec![format_csv_number(outcome_t(o))];
    let values: Vec<f64> = match o {
        SampleOutcome::Regular(a) => match command {
            CommandKind::Recover => a.coefficients.p.clone(),
            CommandKind::Cartan => a
                .cartan
                .r
                .as_slice()
                .iter()
                .chain(a.cartan.l.as_slice())
                .chain(a.cartan.q_desc())
                .copied()
                .collect(),
            CommandKind::ProbeAbel => {
                let p = &a.probe;
                vec![p.det_wprime, p.ddet_w, p.trace_r, p.det_r, p.p1, p.pn]
            }
            CommandKind::Verify => unreachable!("verify renders from its report"),
        },
        other => {
            row.extend(std::iter::repeat_n(status(other).to_string(), width));
            return row;
        }
    };
    row.extend(values.into_iter().map(format_csv_number));
    row
}

fn verdict_exit(report: &VerifyReport) -> i32 {
    let s = &report.summary;
    if s.domain_errors == report.samples.len() {
        return EXIT_DOMAIN;
    }
    match s.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Degenerate => EXIT_DEGENERATE,
    }
}

fn sample_status(s: &SampleResult) -> &'static str {
    if s.domain_error.is_some() {
        "domain_error"
    } else if s.degenerate {
        "degenerate"
    } else if s.failed_checks.is_empty() {
        "pass"
    } else {
        "fail"
    }
}

fn render_verify(config: &CliConfig, sys: &FunctionSystem, report: &VerifyReport) -> Rendered {
    let n = report.n;
    let text = match config.format {
        Format::Json => {
            let samples: Vec<Value> = report
                .samples
                .iter()
                .map(|s| {
                    let mut v = serde_json::to_value(s).expect("serializable sample");
                    v.as_object_mut()
                        .expect("struct serializes to object")
                        .insert("status".into(), Value::from(sample_status(s)));
                    v
                })
                .collect();
            let mut summary = serde_json::to_value(&report.summary).expect("serializable summary");
            summary
                .as_object_mut()
                .expect("struct serializes to object")
                .insert("tol_multiplier".into(), num(config.tol));
            to_json_text(&envelope(config, sys, samples, summary))
        }
        Format::Csv => {
            let residual_names: Vec<&str> = crate::verify::Residuals::NAMES.to_vec();
            let mut header = vec!["t".to_string(), "status".into(), "kappa".into()];
            header.extend(indexed("p", n));
            header.extend(indexed("q", n));
            header.extend(residual_names.iter().map(|s| s.to_string()));
            let mut text = header.join(",");
            text.push('\n');
            for s in &report.samples {
                let mut row = vec![format_csv_number(s.t), sample_status(s).to_string()];
                row.push(s.kappa.map_or(String::new(), format_csv_number));
                let fill = |v: &[f64], out: &mut Vec<String>| {
                    if v.len() == n {
                        out.extend(v.iter().map(|&x| format_csv_number(x)));
                    } else {
                        out.extend(std::iter::repeat_n(String::new(), n));
                    }
                };
                fill(&s.p, &mut row);
                fill(&s.q_desc, &mut row);
                match &s.residuals {
                    Some(r) => row.extend(r.entries().iter().map(|e| format_csv_number(e.1))),
                    None => row.extend(std::iter::repeat_n(String::new(), residual_names.len())),
                }
                text.push_str(&row.join(","));
                text.push('\n');
            }
            text
        }
    };
    Rendered {
        text,
        exit_code: verdict_exit(report),
    }
}
