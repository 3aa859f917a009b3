//! Reader and writer for the CPLEX-style LP text format.
//!
//! Grammar accepted in strict mode (one section keyword per line, in order):
//!
//! ```text
//! Minimize
//!  obj: <term> { (+|-) <term> }
//! Subject To
//!  <name>: <term> { (+|-) <term> } (<=|>=|=) <number>
//! Bounds                                  (optional)
//!  <lo> <= <var> <= <hi> | <var> = <v> | <var> free | <var> (<=|>=) <v>
//! Generals                                (optional)
//!  <var> ...
//! Binaries                                (optional)
//!  <var> ...
//! End
//! ```
//!
//! Terms are `<number> <var>`; expressions may wrap over several lines.
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! written model re-parses coefficient-exactly. Every column appears in the
//! objective (with a zero coefficient if need be) so column order survives
//! a round trip.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::LpFileError;
use crate::model::{LinearModel, Sense};

const TERMS_PER_LINE: usize = 8;

pub fn to_lp_string(model: &LinearModel) -> Result<String, LpFileError> {
    model.validate()?;
    let mut out = String::new();
    let cols = model.columns();

    out.push_str("Minimize\n");
    let obj_terms: Vec<(usize, f64)> = cols.iter().enumerate().map(|(j, c)| (j, c.cost)).collect();
    write_expr(&mut out, " obj:", &obj_terms, model);
    out.push('\n');

    out.push_str("Subject To\n");
    for row in model.rows() {
        let head = format!(" {}:", row.name);
        if row.coeffs.is_empty() {
            // An empty row is written against the first column with a zero
            // coefficient, which the reader drops again.
            let first = cols.first().map(|c| c.name.as_str()).unwrap_or("_");
            let _ = write!(out, "{head} 0 {first}");
        } else {
            write_expr(&mut out, &head, &row.coeffs, model);
        }
        let _ = writeln!(out, " {} {}", row.sense, fmt_num(row.rhs));
    }

    let mut bounds = String::new();
    for c in cols {
        if c.is_binary() {
            continue;
        }
        let (l, u) = (c.lower, c.upper);
        if l == 0.0 && u == f64::INFINITY {
            continue;
        }
        if l == f64::NEG_INFINITY && u == f64::INFINITY {
            let _ = writeln!(bounds, " {} free", c.name);
        } else if l == u {
            let _ = writeln!(bounds, " {} = {}", c.name, fmt_num(l));
        } else {
            let _ = writeln!(bounds, " {} <= {} <= {}", fmt_num(l), c.name, fmt_num(u));
        }
    }
    if !bounds.is_empty() {
        out.push_str("Bounds\n");
        out.push_str(&bounds);
    }

    let generals: Vec<&str> = cols
        .iter()
        .filter(|c| c.integer && !c.is_binary())
        .map(|c| c.name.as_str())
        .collect();
    write_name_section(&mut out, "Generals", &generals);
    let binaries: Vec<&str> = cols.iter().filter(|c| c.is_binary()).map(|c| c.name.as_str()).collect();
    write_name_section(&mut out, "Binaries", &binaries);
    out.push_str("End\n");
    Ok(out)
}

pub fn write_lp(model: &LinearModel, path: impl AsRef<Path>) -> Result<(), LpFileError> {
    let text = to_lp_string(model)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_lp(path: impl AsRef<Path>, strict: bool) -> Result<LinearModel, LpFileError> {
    let text = std::fs::read_to_string(path)?;
    parse_lp(&text, strict)
}

fn write_name_section(out: &mut String, title: &str, names: &[&str]) {
    if names.is_empty() {
        return;
    }
    out.push_str(title);
    out.push('\n');
    for chunk in names.chunks(TERMS_PER_LINE) {
        out.push(' ');
        out.push_str(&chunk.join(" "));
        out.push('\n');
    }
}

fn write_expr(out: &mut String, head: &str, terms: &[(usize, f64)], model: &LinearModel) {
    out.push_str(head);
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.column(j).name;
        let neg = a.is_sign_negative() && a != 0.0;
        let mag = fmt_num(a.abs());
        match (k, neg) {
            (0, false) => {
                let _ = write!(out, " {mag} {name}");
            }
            (0, true) => {
                let _ = write!(out, " - {mag} {name}");
            }
            (_, false) => {
                let _ = write!(out, " + {mag} {name}");
            }
            (_, true) => {
                let _ = write!(out, " - {mag} {name}");
            }
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Sense(Sense),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_keyword(line: &str) -> Option<Section> {
    let lower = line.trim().to_ascii_lowercase();
    let squashed: String = lower.split_whitespace().collect::<Vec<_>>().join(" ");
    match squashed.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn parse_number(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => {
            let first = s.chars().next()?;
            if first.is_ascii_digit() || first == '.' {
                s.parse::<f64>().ok()
            } else {
                None
            }
        }
    }
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<(Tok, usize)>, LpFileError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '+' => {
                toks.push((Tok::Plus, line_no));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, line_no));
                i += 1;
            }
            ':' => {
                toks.push((Tok::Colon, line_no));
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                while j < chars.len() && matches!(chars[j], '<' | '>' | '=') {
                    j += 1;
                }
                let op: String = chars[i..j].iter().collect();
                let sense = match op.as_str() {
                    "<=" | "=<" | "<" => Sense::Le,
                    ">=" | "=>" | ">" => Sense::Ge,
                    "=" => Sense::Eq,
                    _ => {
                        return Err(LpFileError::Parse {
                            line: line_no,
                            message: format!("unknown operator `{op}`"),
                        })
                    }
                };
                toks.push((Tok::Sense(sense), line_no));
                i = j;
            }
            _ => {
                let mut j = i;
                while j < chars.len() && !chars[j].is_whitespace() && !matches!(chars[j], '+' | ':' | '<' | '>' | '=') {
                    // '-' only splits outside exponents.
                    if chars[j] == '-' && j > i && !matches!(chars[j - 1], 'e' | 'E') {
                        break;
                    }
                    if chars[j] == '-' && j == i {
                        break;
                    }
                    j += 1;
                }
                // Exponent sign like 1e+5.
                if j < chars.len()
                    && chars[j] == '+'
                    && j > i
                    && matches!(chars[j - 1], 'e' | 'E')
                    && chars[i].is_ascii_digit()
                {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let word: String = chars[i..j].iter().collect();
                if word.is_empty() {
                    return Err(LpFileError::Parse {
                        line: line_no,
                        message: format!("unexpected character `{c}`"),
                    });
                }
                match parse_number(&word) {
                    Some(v) => toks.push((Tok::Num(v), line_no)),
                    None => {
                        if !crate::model::is_identifier(&word) {
                            return Err(LpFileError::Parse {
                                line: line_no,
                                message: format!("invalid token `{word}`"),
                            });
                        }
                        toks.push((Tok::Ident(word), line_no));
                    }
                }
                i = j;
            }
        }
    }
    Ok(toks)
}

struct Parser {
    strict: bool,
    model: LinearModel,
    index: HashMap<String, usize>,
}

impl Parser {
    fn column(&mut self, name: &str, line: usize, declare: bool) -> Result<usize, LpFileError> {
        if let Some(&j) = self.index.get(name) {
            return Ok(j);
        }
        if !declare && self.strict {
            return Err(LpFileError::Parse {
                line,
                message: format!("undeclared variable `{name}`"),
            });
        }
        let j = self.model.add_column(name, 0.0, 0.0, f64::INFINITY, false);
        self.index.insert(name.to_string(), j);
        Ok(j)
    }

    /// Parses `[sign] [num] ident { sign [num] ident }`, stopping at a sense
    /// token, a `name:` label or the end of the stream.
    fn expr(
        &mut self,
        toks: &[(Tok, usize)],
        pos: &mut usize,
    ) -> Result<Vec<(usize, f64)>, LpFileError> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let line = toks.get(*pos).map(|t| t.1).unwrap_or(0);
            let mut sign = 1.0;
            match toks.get(*pos).map(|t| &t.0) {
                None | Some(Tok::Sense(_)) => break,
                Some(Tok::Ident(_)) if matches!(toks.get(*pos + 1).map(|t| &t.0), Some(Tok::Colon)) => break,
                Some(Tok::Plus) => {
                    sign = 1.0;
                    *pos += 1;
                }
                Some(Tok::Minus) => {
                    sign = -1.0;
                    *pos += 1;
                }
                _ if first => {}
                Some(t) => {
                    return Err(LpFileError::Parse {
                        line,
                        message: format!("expected `+` or `-`, found {t:?}"),
                    })
                }
            }
            first = false;
            let mut coef = 1.0;
            if let Some((Tok::Num(v), _)) = toks.get(*pos) {
                coef = *v;
                *pos += 1;
            } else if self.strict {
                return Err(LpFileError::Parse {
                    line,
                    message: "strict mode requires an explicit coefficient".into(),
                });
            }
            match toks.get(*pos) {
                Some((Tok::Ident(name), l)) => {
                    let (name, l) = (name.clone(), *l);
                    let j = self.column(&name, l, true)?;
                    terms.push((j, sign * coef));
                    *pos += 1;
                }
                other => {
                    return Err(LpFileError::Parse {
                        line: other.map(|t| t.1).unwrap_or(line),
                        message: "expected a variable name".into(),
                    })
                }
            }
        }
        Ok(terms)
    }
}

/// Parses LP text. In strict mode the file must follow the grammar in the
/// module documentation exactly: canonical section order, named rows,
/// explicit coefficients, declared variables and a closing `End`.
pub fn parse_lp(text: &str, strict: bool) -> Result<LinearModel, LpFileError> {
    let mut p = Parser {
        strict,
        model: LinearModel::new(),
        index: HashMap::new(),
    };
    let mut section: Option<Section> = None;
    let mut seen: Vec<Section> = Vec::new();
    let mut obj_toks: Vec<(Tok, usize)> = Vec::new();
    let mut con_toks: Vec<(Tok, usize)> = Vec::new();
    let mut bound_lines: Vec<(usize, Vec<(Tok, usize)>)> = Vec::new();
    let mut int_names: Vec<(usize, String, bool)> = Vec::new();
    let mut ended = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('\\') {
            Some(k) => &raw[..k],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        if ended {
            return Err(LpFileError::Parse {
                line: line_no,
                message: "content after End".into(),
            });
        }
        if let Some(s) = section_keyword(line) {
            if seen.contains(&s) {
                return Err(LpFileError::Parse {
                    line: line_no,
                    message: format!("duplicate section {s:?}"),
                });
            }
            if strict && seen.last().is_some_and(|&last| last > s) {
                return Err(LpFileError::Parse {
                    line: line_no,
                    message: format!("section {s:?} out of order"),
                });
            }
            if seen.is_empty() && s != Section::Objective {
                return Err(LpFileError::Parse {
                    line: line_no,
                    message: "file must start with Minimize".into(),
                });
            }
            seen.push(s);
            section = Some(s);
            if s == Section::End {
                ended = true;
            }
            continue;
        }
        let lower = line.trim().to_ascii_lowercase();
        if lower.starts_with("max") {
            return Err(LpFileError::Parse {
                line: line_no,
                message: "only minimisation is supported".into(),
            });
        }
        match section {
            None => {
                return Err(LpFileError::Parse {
                    line: line_no,
                    message: "text before the first section".into(),
                })
            }
            Some(Section::Objective) => obj_toks.extend(tokenize(line, line_no)?),
            Some(Section::Constraints) => con_toks.extend(tokenize(line, line_no)?),
            Some(Section::Bounds) => bound_lines.push((line_no, tokenize(line, line_no)?)),
            Some(Section::Generals) | Some(Section::Binaries) => {
                let binary = section == Some(Section::Binaries);
                for w in line.split_whitespace() {
                    int_names.push((line_no, w.to_string(), binary));
                }
            }
            Some(Section::End) => unreachable!(),
        }
    }
    if strict && !ended {
        return Err(LpFileError::Parse {
            line: text.lines().count(),
            message: "missing End".into(),
        });
    }
    if strict && !seen.contains(&Section::Constraints) {
        return Err(LpFileError::Parse {
            line: text.lines().count(),
            message: "missing Subject To".into(),
        });
    }

    // Objective.
    let mut pos = 0;
    if let (Some((Tok::Ident(_), _)), Some((Tok::Colon, _))) = (obj_toks.first(), obj_toks.get(1)) {
        pos = 2;
    } else if strict && !obj_toks.is_empty() {
        return Err(LpFileError::Parse {
            line: obj_toks[0].1,
            message: "objective must be labelled".into(),
        });
    }
    let terms = p.expr(&obj_toks, &mut pos)?;
    if pos < obj_toks.len() {
        return Err(LpFileError::Parse {
            line: obj_toks[pos].1,
            message: "trailing tokens in objective".into(),
        });
    }
    for (j, a) in terms {
        let c = p.model.column(j).cost;
        p.model.set_cost(j, c + a);
    }

    // Constraints.
    let mut pos = 0;
    let mut row_names: HashMap<String, usize> = HashMap::new();
    while pos < con_toks.len() {
        let line = con_toks[pos].1;
        let name = match (con_toks.get(pos), con_toks.get(pos + 1)) {
            (Some((Tok::Ident(n), _)), Some((Tok::Colon, _))) => {
                let n = n.clone();
                pos += 2;
                n
            }
            _ if strict => {
                return Err(LpFileError::Parse {
                    line,
                    message: "constraint must be labelled".into(),
                })
            }
            _ => format!("R{}", p.model.num_rows() + 1),
        };
        if row_names.insert(name.clone(), line).is_some() {
            return Err(LpFileError::Parse {
                line,
                message: format!("duplicate row `{name}`"),
            });
        }
        let terms = p.expr(&con_toks, &mut pos)?;
        let sense = match con_toks.get(pos) {
            Some((Tok::Sense(s), _)) => *s,
            _ => {
                return Err(LpFileError::Parse {
                    line,
                    message: format!("row `{name}` has no sense"),
                })
            }
        };
        pos += 1;
        let mut sign = 1.0;
        match con_toks.get(pos) {
            Some((Tok::Minus, _)) => {
                sign = -1.0;
                pos += 1;
            }
            Some((Tok::Plus, _)) => pos += 1,
            _ => {}
        }
        let rhs = match con_toks.get(pos) {
            Some((Tok::Num(v), _)) if v.is_finite() => sign * v,
            _ => {
                return Err(LpFileError::Parse {
                    line,
                    message: format!("row `{name}` has no finite right-hand side"),
                })
            }
        };
        pos += 1;
        p.model.add_row(name, terms, sense, rhs);
    }

    // Bounds.
    for (line, toks) in bound_lines {
        apply_bound(&mut p, line, &toks)?;
    }

    for (line, name, binary) in int_names {
        if !crate::model::is_identifier(&name) {
            return Err(LpFileError::Parse {
                line,
                message: format!("invalid name `{name}`"),
            });
        }
        let j = p.column(&name, line, false)?;
        p.model.set_integer(j, true);
        if binary {
            p.model.set_bounds(j, 0.0, 1.0);
        }
    }

    p.model.validate()?;
    Ok(p.model)
}

fn apply_bound(p: &mut Parser, line: usize, toks: &[(Tok, usize)]) -> Result<(), LpFileError> {
    let err = |m: &str| LpFileError::Parse {
        line,
        message: m.to_string(),
    };
    // Fold a leading sign into a following number.
    let mut folded: Vec<Tok> = Vec::new();
    let mut k = 0;
    while k < toks.len() {
        match (&toks[k].0, toks.get(k + 1).map(|t| &t.0)) {
            (Tok::Minus, Some(Tok::Num(v))) => {
                folded.push(Tok::Num(-v));
                k += 2;
            }
            (Tok::Plus, Some(Tok::Num(v))) => {
                folded.push(Tok::Num(*v));
                k += 2;
            }
            (t, _) => {
                folded.push(t.clone());
                k += 1;
            }
        }
    }
    match folded.as_slice() {
        [Tok::Ident(v), Tok::Ident(f)] if f.eq_ignore_ascii_case("free") => {
            let j = p.column(v, line, false)?;
            p.model.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
        }
        [Tok::Num(lo), Tok::Sense(Sense::Le), Tok::Ident(v), Tok::Sense(Sense::Le), Tok::Num(hi)] => {
            let j = p.column(v, line, false)?;
            p.model.set_bounds(j, *lo, *hi);
        }
        [Tok::Ident(v), Tok::Sense(s), Tok::Num(b)] => {
            let j = p.column(v, line, false)?;
            let c = p.model.column(j).clone();
            match s {
                Sense::Le => p.model.set_bounds(j, c.lower, *b),
                Sense::Ge => p.model.set_bounds(j, *b, c.upper),
                Sense::Eq => p.model.set_bounds(j, *b, *b),
            }
        }
        [Tok::Num(b), Tok::Sense(s), Tok::Ident(v)] => {
            let j = p.column(v, line, false)?;
            let c = p.model.column(j).clone();
            match s {
                Sense::Le => p.model.set_bounds(j, *b, c.upper),
                Sense::Ge => p.model.set_bounds(j, c.lower, *b),
                Sense::Eq => p.model.set_bounds(j, *b, *b),
            }
        }
        _ => return Err(err("malformed bound")),
    }
    Ok(())
}
