//! Text form of the function descriptors.
//!
//! A 1-D descriptor is a comma-separated list of terms `kind:amplitude` (for
//! `constant`) or `kind:amplitude:parameter`; a 2-D descriptor is a list of
//! `product:amplitude:x_kind:x_parameter:y_kind:y_parameter` terms, with
//! `constant:amplitude` as shorthand. The empty string and `zero` both denote
//! the zero function. Numbers are written with Rust's shortest-round-trip
//! formatting, so parse(format(d)) reproduces every f64 bit-exactly.

use backstep_core::descriptor::{Function1, Function2, ProductTerm, Term, TermKind};

fn kind_name(kind: TermKind) -> &'static str {
    match kind {
        TermKind::Constant => "constant",
        TermKind::Monomial => "monomial",
        TermKind::Sine => "sine",
        TermKind::Cosine => "cosine",
        TermKind::Exponential => "exponential",
    }
}

fn parse_kind(s: &str) -> Result<TermKind, String> {
    match s {
        "constant" => Ok(TermKind::Constant),
        "monomial" => Ok(TermKind::Monomial),
        "sine" => Ok(TermKind::Sine),
        "cosine" => Ok(TermKind::Cosine),
        "exponential" => Ok(TermKind::Exponential),
        other => Err(format!("unknown term kind `{other}`")),
    }
}

fn parse_num(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
}

pub fn format_function1(f: &Function1) -> String {
    if f.terms.is_empty() {
        return String::from("zero");
    }
    f.terms
        .iter()
        .map(|t| match t.kind {
            TermKind::Constant => format!("constant:{}", t.amplitude),
            k => format!("{}:{}:{}", kind_name(k), t.amplitude, t.parameter),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn parse_function1(s: &str) -> Result<Function1, String> {
    let s = s.trim();
    if s.is_empty() || s == "zero" {
        return Ok(Function1::zero());
    }
    let mut terms = Vec::new();
    for part in s.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        let kind = parse_kind(fields[0].trim())?;
        let term = match (kind, fields.len()) {
            (TermKind::Constant, 2) => Term::new(kind, parse_num(fields[1])?, 0.0),
            (TermKind::Constant, _) => {
                return Err(format!("constant term takes one value, got `{part}`"))
            }
            (_, 3) => Term::new(kind, parse_num(fields[1])?, parse_num(fields[2])?),
            (_, _) => {
                return Err(format!(
                    "term `{part}` must be kind:amplitude:parameter",
                ))
            }
        };
        if kind == TermKind::Monomial
            && (term.parameter < 0.0 || term.parameter.fract() != 0.0)
        {
            return Err(format!(
                "monomial power must be a nonnegative integer, got {}",
                term.parameter
            ));
        }
        terms.push(term);
    }
    Ok(Function1 { terms })
}

pub fn format_function2(f: &Function2) -> String {
    if f.terms.is_empty() {
        return String::from("zero");
    }
    f.terms
        .iter()
        .map(|t| {
            if t.x_kind == TermKind::Constant && t.y_kind == TermKind::Constant {
                format!("constant:{}", t.amplitude)
            } else {
                format!(
                    "product:{}:{}:{}:{}:{}",
                    t.amplitude,
                    kind_name(t.x_kind),
                    t.x_parameter,
                    kind_name(t.y_kind),
                    t.y_parameter
                )
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn parse_function2(s: &str) -> Result<Function2, String> {
    let s = s.trim();
    if s.is_empty() || s == "zero" {
        return Ok(Function2::zero());
    }
    let mut terms = Vec::new();
    for part in s.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        let term = match fields[0].trim() {
            "constant" if fields.len() == 2 => ProductTerm {
                amplitude: parse_num(fields[1])?,
                x_kind: TermKind::Constant,
                x_parameter: 0.0,
                y_kind: TermKind::Constant,
                y_parameter: 0.0,
            },
            "product" if fields.len() == 6 => ProductTerm {
                amplitude: parse_num(fields[1])?,
                x_kind: parse_kind(fields[2].trim())?,
                x_parameter: parse_num(fields[3])?,
                y_kind: parse_kind(fields[4].trim())?,
                y_parameter: parse_num(fields[5])?,
            },
            _ => {
                return Err(format!(
                    "2-D term `{part}` must be constant:amplitude or \
                     product:amplitude:x_kind:x_parameter:y_kind:y_parameter"
                ))
            }
        };
        terms.push(term);
    }
    Ok(Function2 { terms })
}
