//! Line-oriented circuit-description format.
//!
//! ```text
//! document  := line*
//! line      := directive? comment?
//! comment   := '#' any*
//! directive := 'internal' UINT
//!            | 'path' NAME
//!            | 'input' NAME
//!            | 'element' KIND NAME NAME? (KEY '=' NUMBER)*
//!            | 'detector' NAME ('threshold' | 'number' UINT)
//!            | 'output' NAME
//! NAME      := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Element kinds and their keys (all keys required, no others accepted):
//!
//! | kind    | ports | keys                       |
//! |---------|-------|----------------------------|
//! | `bs`    | 2     | `r_h`, `r_v` (reflectance) |
//! | `pbs`   | 2     |                            |
//! | `swap`  | 2     |                            |
//! | `hwp`   | 1     | `theta` (degrees)          |
//! | `qwp`   | 1     | `theta` (degrees)          |
//! | `phase` | 1     | `phi_h`, `phi_v` (degrees) |
//!
//! `internal` defaults to 4 and may appear at most once. Paths may be used
//! before they are declared; every used path must be declared somewhere.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::elements::{
    Angle, Circuit, DetectorBinding, DetectorModel, ElementKind, ElementSpec, HeraldSpec,
    HeraldedCircuit, Ports,
};
use crate::fock::{InternalState, ModeRegistry, PhotonInput, Polarization, DEFAULT_INTERNAL_DIM};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownDirective(String),
    UnknownElement(String),
    UnknownKey {
        element: String,
        key: String,
    },
    MissingKey {
        element: String,
        key: String,
    },
    DuplicateKey(String),
    InvalidNumber(String),
    UnboundPath(String),
    DuplicatePath(String),
    /// Structurally well-formed but physically invalid (e.g. reflectance > 1).
    Invalid(String),
}

impl ParseErrorKind {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::Syntax(_) => "syntax",
            ParseErrorKind::UnknownDirective(_) => "unknown-directive",
            ParseErrorKind::UnknownElement(_) => "unknown-element",
            ParseErrorKind::UnknownKey { .. } => "unknown-key",
            ParseErrorKind::MissingKey { .. } => "missing-key",
            ParseErrorKind::DuplicateKey(_) => "duplicate-key",
            ParseErrorKind::InvalidNumber(_) => "invalid-number",
            ParseErrorKind::UnboundPath(_) => "unbound-path",
            ParseErrorKind::DuplicatePath(_) => "duplicate-path",
            ParseErrorKind::Invalid(_) => "invalid",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "{m}"),
            ParseErrorKind::UnknownDirective(d) => write!(f, "unknown directive '{d}'"),
            ParseErrorKind::UnknownElement(e) => write!(f, "unknown element '{e}'"),
            ParseErrorKind::UnknownKey { element, key } => {
                write!(f, "unknown key '{key}' for element '{element}'")
            }
            ParseErrorKind::MissingKey { element, key } => {
                write!(f, "element '{element}' requires key '{key}'")
            }
            ParseErrorKind::DuplicateKey(k) => write!(f, "key '{k}' given twice"),
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number '{s}'"),
            ParseErrorKind::UnboundPath(p) => write!(f, "path '{p}' is not declared"),
            ParseErrorKind::DuplicatePath(p) => write!(f, "path '{p}' declared twice"),
            ParseErrorKind::Invalid(m) => write!(f, "{m}"),
        }
    }
}

/// Parse failure at a 1-based line/column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind} [{}]", kind.code())]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &content[s..i],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &content[s..],
            column: s + 1,
        });
    }
    tokens
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Parser {
    line: usize,
}

impl Parser {
    fn err(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column,
            kind,
        }
    }

    fn name(&self, tok: Option<&Token<'_>>, what: &str, eol: usize) -> Result<String, ParseError> {
        match tok {
            Some(t) if is_name(t.text) => Ok(t.text.to_string()),
            Some(t) => Err(self.err(
                t.column,
                ParseErrorKind::Syntax(format!("invalid {what} '{}'", t.text)),
            )),
            None => Err(self.err(eol, ParseErrorKind::Syntax(format!("expected {what}")))),
        }
    }

    fn uint(&self, tok: Option<&Token<'_>>, what: &str, eol: usize) -> Result<u32, ParseError> {
        match tok {
            Some(t) => t
                .text
                .parse::<u32>()
                .map_err(|_| self.err(t.column, ParseErrorKind::InvalidNumber(t.text.to_string()))),
            None => Err(self.err(eol, ParseErrorKind::Syntax(format!("expected {what}")))),
        }
    }

    fn no_more(&self, tok: Option<&Token<'_>>) -> Result<(), ParseError> {
        match tok {
            Some(t) => Err(self.err(
                t.column,
                ParseErrorKind::Syntax(format!("unexpected token '{}'", t.text)),
            )),
            None => Ok(()),
        }
    }
}

struct PathUse {
    name: String,
    line: usize,
    column: usize,
}

/// Parses a circuit document into a validated circuit and herald.
pub fn parse_circuit(text: &str) -> Result<HeraldedCircuit, ParseError> {
    let mut paths: Vec<String> = Vec::new();
    let mut declared: HashSet<String> = HashSet::new();
    let mut uses: Vec<PathUse> = Vec::new();
    let mut internal: Option<usize> = None;
    let mut inputs = Vec::new();
    let mut elements: Vec<(ElementSpec, usize)> = Vec::new();
    let mut detectors = Vec::new();
    let mut outputs = Vec::new();
    let mut last_line = 1;

    for (lineno, raw) in text.lines().enumerate() {
        let p = Parser { line: lineno + 1 };
        last_line = lineno + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        let eol = raw.trim_end().len() + 1;
        let mut rest = toks[1..].iter();
        let use_path = |t: &Token<'_>, uses: &mut Vec<PathUse>| {
            uses.push(PathUse {
                name: t.text.to_string(),
                line: lineno + 1,
                column: t.column,
            });
        };
        match head.text {
            "internal" => {
                let d = p.uint(rest.next(), "internal dimension", eol)?;
                p.no_more(rest.next())?;
                if d == 0 {
                    return Err(p.err(
                        toks[1].column,
                        ParseErrorKind::Invalid("internal dimension must be >= 1".into()),
                    ));
                }
                if internal.replace(d as usize).is_some() {
                    return Err(p.err(
                        head.column,
                        ParseErrorKind::Syntax("'internal' given twice".into()),
                    ));
                }
            }
            "path" => {
                let tok = rest.next();
                let name = p.name(tok, "path name", eol)?;
                p.no_more(rest.next())?;
                if !declared.insert(name.clone()) {
                    return Err(p.err(
                        tok.map_or(eol, |t| t.column),
                        ParseErrorKind::DuplicatePath(name),
                    ));
                }
                paths.push(name);
            }
            "input" | "output" => {
                let tok = rest.next();
                let name = p.name(tok, "path name", eol)?;
                p.no_more(rest.next())?;
                use_path(tok.unwrap(), &mut uses);
                if head.text == "input" {
                    inputs.push(name);
                } else {
                    outputs.push(name);
                }
            }
            "detector" => {
                let tok = rest.next();
                let name = p.name(tok, "path name", eol)?;
                use_path(tok.unwrap(), &mut uses);
                let model = match rest.next() {
                    Some(t) if t.text == "threshold" => DetectorModel::Threshold,
                    Some(t) if t.text == "number" => {
                        DetectorModel::NumberResolving(p.uint(rest.next(), "photon number", eol)?)
                    }
                    Some(t) => {
                        return Err(p.err(
                            t.column,
                            ParseErrorKind::Syntax(format!("unknown detector model '{}'", t.text)),
                        ))
                    }
                    None => {
                        return Err(p.err(
                            eol,
                            ParseErrorKind::Syntax("expected detector model".into()),
                        ))
                    }
                };
                p.no_more(rest.next())?;
                detectors.push(DetectorBinding { path: name, model });
            }
            "element" => {
                let kind_tok = rest.next().ok_or_else(|| {
                    p.err(eol, ParseErrorKind::Syntax("expected element kind".into()))
                })?;
                let kind_name = kind_tok.text;
                let (ports, keys): (usize, &[&str]) = match kind_name {
                    "bs" => (2, &["r_h", "r_v"]),
                    "pbs" | "swap" => (2, &[]),
                    "hwp" | "qwp" => (1, &["theta"]),
                    "phase" => (1, &["phi_h", "phi_v"]),
                    other => {
                        return Err(p.err(
                            kind_tok.column,
                            ParseErrorKind::UnknownElement(other.to_string()),
                        ))
                    }
                };
                let mut port_names = Vec::new();
                for _ in 0..ports {
                    let tok = rest.next();
                    match tok {
                        Some(t) if t.text.contains('=') => {
                            return Err(p.err(
                                t.column,
                                ParseErrorKind::Syntax(format!(
                                    "element '{kind_name}' needs {ports} path(s)"
                                )),
                            ))
                        }
                        _ => {}
                    }
                    port_names.push(p.name(tok, "path name", eol)?);
                    use_path(tok.unwrap(), &mut uses);
                }
                let mut values: HashMap<&str, f64> = HashMap::new();
                for t in rest {
                    let Some((k, v)) = t.text.split_once('=') else {
                        return Err(p.err(
                            t.column,
                            ParseErrorKind::Syntax(format!("expected key=value, got '{}'", t.text)),
                        ));
                    };
                    if !keys.contains(&k) {
                        return Err(p.err(
                            t.column,
                            ParseErrorKind::UnknownKey {
                                element: kind_name.into(),
                                key: k.into(),
                            },
                        ));
                    }
                    let x: f64 =
                        v.parse()
                            .ok()
                            .filter(|x: &f64| x.is_finite())
                            .ok_or_else(|| {
                                p.err(
                                    t.column + k.len() + 1,
                                    ParseErrorKind::InvalidNumber(v.to_string()),
                                )
                            })?;
                    if values.insert(k, x).is_some() {
                        return Err(p.err(t.column, ParseErrorKind::DuplicateKey(k.into())));
                    }
                }
                for k in keys {
                    if !values.contains_key(k) {
                        return Err(p.err(
                            eol,
                            ParseErrorKind::MissingKey {
                                element: kind_name.into(),
                                key: (*k).into(),
                            },
                        ));
                    }
                }
                let deg = |k: &str| Angle::from_degrees(values[k]);
                let kind = match kind_name {
                    "bs" => ElementKind::BeamSplitter {
                        r_h: values["r_h"],
                        r_v: values["r_v"],
                    },
                    "pbs" => ElementKind::Pbs,
                    "swap" => ElementKind::PathSwap,
                    "hwp" => ElementKind::Hwp {
                        theta: deg("theta"),
                    },
                    "qwp" => ElementKind::Qwp {
                        theta: deg("theta"),
                    },
                    _ => ElementKind::PhaseShift {
                        phi_h: deg("phi_h"),
                        phi_v: deg("phi_v"),
                    },
                };
                let ports = if port_names.len() == 2 {
                    Ports::Two(port_names[0].clone(), port_names[1].clone())
                } else {
                    Ports::One(port_names[0].clone())
                };
                elements.push((ElementSpec { kind, ports }, lineno + 1));
            }
            other => {
                return Err(p.err(
                    head.column,
                    ParseErrorKind::UnknownDirective(other.to_string()),
                ))
            }
        }
    }

    if let Some(u) = uses.iter().find(|u| !declared.contains(&u.name)) {
        return Err(ParseError {
            line: u.line,
            column: u.column,
            kind: ParseErrorKind::UnboundPath(u.name.clone()),
        });
    }

    let invalid = |line: usize, e: crate::Error| ParseError {
        line,
        column: 1,
        kind: ParseErrorKind::Invalid(e.to_string()),
    };
    let registry = ModeRegistry::new(paths, internal.unwrap_or(DEFAULT_INTERNAL_DIM))
        .map_err(|e| invalid(1, e))?;
    for (e, line) in &elements {
        e.validate(&registry).map_err(|err| invalid(*line, err))?;
    }
    let circuit = Circuit::new(
        registry,
        elements.into_iter().map(|(e, _)| e).collect(),
        inputs,
    )
    .map_err(|e| invalid(last_line, e))?;
    let herald = HeraldSpec::new(detectors, outputs).map_err(|e| invalid(last_line, e))?;
    Ok(HeraldedCircuit { circuit, herald })
}

/// Parses a photon list such as `s1:V, s2:H, a1:H:0.9`.
///
/// Each item is `path:pol` with an optional third field giving the overlap
/// `x` of the photon's internal state with the reference state
/// (`x e0 + sqrt(1 - x^2) e1`); without it the photon is in `e0`.
pub fn parse_photons(text: &str) -> crate::Result<Vec<PhotonInput>> {
    let mut photons = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<&str> = item.split(':').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(crate::Error::Config(format!(
                "photon '{item}' is not path:pol[:overlap]"
            )));
        }
        let pol: Polarization = fields[1].parse()?;
        let internal = match fields.get(2) {
            None => InternalState::basis(0),
            Some(x) => {
                let x: f64 = x.parse().map_err(|_| {
                    crate::Error::Config(format!("overlap '{x}' in '{item}' is not a number"))
                })?;
                InternalState::with_overlap(x)?
            }
        };
        photons.push(PhotonInput::new(fields[0], pol, internal));
    }
    if photons.is_empty() {
        return Err(crate::Error::Config("empty photon list".into()));
    }
    Ok(photons)
}

/// Writes a circuit in the description format; [`parse_circuit`] inverts it.
pub fn serialize_circuit(doc: &HeraldedCircuit) -> String {
    let c = &doc.circuit;
    let mut out = String::new();
    let _ = writeln!(out, "internal {}", c.registry().internal_dim());
    for p in c.registry().paths() {
        let _ = writeln!(out, "path {p}");
    }
    for p in c.inputs() {
        let _ = writeln!(out, "input {p}");
    }
    for e in c.elements() {
        let _ = write!(out, "element {}", e.kind.name());
        for p in e.ports.paths() {
            let _ = write!(out, " {p}");
        }
        match &e.kind {
            ElementKind::BeamSplitter { r_h, r_v } => {
                let _ = write!(out, " r_h={r_h:?} r_v={r_v:?}");
            }
            ElementKind::Hwp { theta } | ElementKind::Qwp { theta } => {
                let _ = write!(out, " theta={:?}", theta.degrees());
            }
            ElementKind::PhaseShift { phi_h, phi_v } => {
                let _ = write!(
                    out,
                    " phi_h={:?} phi_v={:?}",
                    phi_h.degrees(),
                    phi_v.degrees()
                );
            }
            ElementKind::Pbs | ElementKind::PathSwap => {}
        }
        out.push('\n');
    }
    for d in &doc.herald.detectors {
        let _ = writeln!(out, "detector {} {}", d.path, d.model);
    }
    for o in &doc.herald.outputs {
        let _ = writeln!(out, "output {o}");
    }
    out
}
