//! Backslash escaping for whitespace-delimited text formats.
//!
//! The model file and the TSV outputs carry arbitrary password bytes in
//! space- or tab-separated fields, so the characters that would break the
//! framing are escaped: `\\`, `\n`, `\r`, `\t`, space as `\s`, the boundary
//! symbol as `\B`, and any other control character as `\u{XXXX}`.

use crate::error::{Error, Result};
use crate::markov::Sym;

fn push_escaped_char(out: &mut String, c: char) {
    match c {
        '\\' => out.push_str("\\\\"),
        '\n' => out.push_str("\\n"),
        '\r' => out.push_str("\\r"),
        '\t' => out.push_str("\\t"),
        ' ' => out.push_str("\\s"),
        c if c.is_control() => out.push_str(&format!("\\u{{{:04X}}}", c as u32)),
        c => out.push(c),
    }
}

/// Escape a plain string (no boundary symbols).
pub fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        push_escaped_char(&mut out, c);
    }
    out
}

/// Escape a symbol sequence; the boundary symbol becomes `\B`.
pub fn escape_syms(gram: &[Sym]) -> String {
    let mut out = String::with_capacity(gram.len());
    for sym in gram {
        match sym {
            Sym::Boundary => out.push_str("\\B"),
            Sym::Ch(c) => push_escaped_char(&mut out, *c),
        }
    }
    out
}

/// Inverse of [`escape_syms`].
pub fn unescape_syms(token: &str) -> Result<Vec<Sym>> {
    let mut out = Vec::new();
    let mut chars = token.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(Sym::Ch(c));
            continue;
        }
        let code = chars.next().ok_or_else(|| Error::MalformedGram {
            message: "dangling backslash".into(),
        })?;
        let sym = match code {
            '\\' => Sym::Ch('\\'),
            'n' => Sym::Ch('\n'),
            'r' => Sym::Ch('\r'),
            't' => Sym::Ch('\t'),
            's' => Sym::Ch(' '),
            'B' => Sym::Boundary,
            'u' => {
                if chars.next() != Some('{') {
                    return Err(Error::MalformedGram {
                        message: "expected `{` after \\u".into(),
                    });
                }
                let hex: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let value = u32::from_str_radix(&hex, 16).map_err(|_| Error::MalformedGram {
                    message: format!("bad hex escape \\u{{{hex}}}"),
                })?;
                let c = char::from_u32(value).ok_or_else(|| Error::MalformedGram {
                    message: format!("\\u{{{hex}}} is not a character"),
                })?;
                Sym::Ch(c)
            }
            other => {
                return Err(Error::MalformedGram {
                    message: format!("unknown escape \\{other}"),
                })
            }
        };
        out.push(sym);
    }
    Ok(out)
}

/// Inverse of [`escape_str`]; rejects `\B`.
pub fn unescape_str(token: &str) -> Result<String> {
    let syms = unescape_syms(token)?;
    let mut out = String::with_capacity(syms.len());
    for sym in syms {
        match sym {
            Sym::Boundary => {
                return Err(Error::MalformedGram {
                    message: "boundary symbol not allowed here".into(),
                })
            }
            Sym::Ch(c) => out.push(c),
        }
    }
    Ok(out)
}
