//! Text form for polynomials: terms like `coeff * var1^e1 * var2^e2`,
//! joined with `+`/`-`. Variables are named by role prefix and 1-based
//! index (`x1`, `nu1`, `w1`, `sigma1`). Coefficients print with Rust's
//! shortest round-trip formatting, so emit/parse is exact.

use super::{PolyError, Polynomial, VarSpace};
use std::fmt;
use std::sync::Arc;

pub(super) fn format_polynomial(p: &Polynomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (exp, c) in p.terms() {
        let mag = c.abs();
        if first {
            if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
        } else if c < 0.0 {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let is_const = exp.iter().all(|&e| e == 0);
        if is_const {
            write!(f, "{mag}")?;
        } else {
            let mut lead = true;
            if (mag - 1.0).abs() > 0.0 {
                write!(f, "{mag}")?;
                lead = false;
            }
            for (i, &e) in exp.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !lead {
                    write!(f, "*")?;
                }
                lead = false;
                write!(f, "{}", p.space().var(i).name)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Star,
    Caret,
    Plus,
    Minus,
}

fn tokenize(input: &str) -> Result<Vec<Token>, PolyError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push(Token::Minus);
                i += c.len_utf8();
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && (bytes[i + 1].is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2; // consume exponent marker and its sign/first digit
                    } else {
                        break;
                    }
                }
                let s = &input[start..i];
                let v: f64 = s
                    .parse()
                    .map_err(|_| PolyError::Parse(format!("bad number `{s}`")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Token::Ident(input[start..i].to_string()));
            }
            other => return Err(PolyError::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

/// Parse the text form against a known variable space. Unknown variable
/// names are an error.
pub fn parse_polynomial(input: &str, space: &Arc<VarSpace>) -> Result<Polynomial, PolyError> {
    let toks = tokenize(input)?;
    if toks.is_empty() {
        return Err(PolyError::Parse("empty polynomial".into()));
    }
    let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
    let mut i = 0;
    loop {
        // sign prefix
        let mut sign = 1.0;
        while i < toks.len() {
            match toks[i] {
                Token::Plus => i += 1,
                Token::Minus => {
                    sign = -sign;
                    i += 1;
                }
                _ => break,
            }
        }
        if i >= toks.len() {
            return Err(PolyError::Parse("dangling sign".into()));
        }
        // factors separated by optional '*'
        let mut coeff = sign;
        let mut exp = vec![0u32; space.dim()];
        let mut saw_factor = false;
        loop {
            match toks.get(i) {
                Some(Token::Num(v)) => {
                    coeff *= v;
                    i += 1;
                    saw_factor = true;
                }
                Some(Token::Ident(name)) => {
                    let vi = space
                        .index_of(name)
                        .ok_or_else(|| PolyError::UnknownVariable(name.clone()))?;
                    i += 1;
                    let mut e = 1u32;
                    if matches!(toks.get(i), Some(Token::Caret)) {
                        i += 1;
                        match toks.get(i) {
                            Some(Token::Num(v)) if v.fract() == 0.0 && *v >= 0.0 => {
                                e = *v as u32;
                                i += 1;
                            }
                            _ => return Err(PolyError::Parse("expected integer exponent".into())),
                        }
                    }
                    exp[vi] += e;
                    saw_factor = true;
                }
                _ => break,
            }
            if matches!(toks.get(i), Some(Token::Star)) {
                i += 1;
                continue;
            }
            // implicit product only allowed before an identifier (e.g. "2 x1")
            if matches!(toks.get(i), Some(Token::Ident(_))) {
                continue;
            }
            break;
        }
        if !saw_factor {
            return Err(PolyError::Parse("expected term".into()));
        }
        terms.push((exp, coeff));
        match toks.get(i) {
            None => break,
            Some(Token::Plus) | Some(Token::Minus) => continue,
            Some(t) => return Err(PolyError::Parse(format!("unexpected token {t:?}"))),
        }
    }
    Polynomial::from_terms(space.clone(), terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_display_parse() {
        let s = VarSpace::canonical(2, 1, 1, 1);
        let p = parse_polynomial(
            "0.00242*x1^4 - 0.091*x1^3*x2 + 0.7696*nu1*w1 + 1.4935*sigma1 + 3.1329",
            &s,
        )
        .unwrap();
        let q = parse_polynomial(&p.to_string(), &s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn parses_scientific_notation() {
        let s = VarSpace::canonical(1, 0, 0, 0);
        let p = parse_polynomial("1e-3*x1 + 2.5E+2", &s).unwrap();
        assert!((p.eval(&[1.0]).unwrap() - 250.001).abs() < 1e-12);
    }

    #[test]
    fn parses_bare_variable_and_implicit_one() {
        let s = VarSpace::canonical(1, 0, 0, 0);
        let p = parse_polynomial("x1 - 1", &s).unwrap();
        assert_eq!(p.eval(&[3.0]).unwrap(), 2.0);
    }

    #[test]
    fn rejects_unknown_variable() {
        let s = VarSpace::canonical(1, 0, 0, 0);
        assert!(matches!(
            parse_polynomial("x2 + 1", &s),
            Err(PolyError::UnknownVariable(_))
        ));
    }

    #[test]
    fn zero_displays_and_parses() {
        let s = VarSpace::canonical(1, 0, 0, 0);
        let z = Polynomial::zero(s.clone());
        assert_eq!(z.to_string(), "0");
        assert!(parse_polynomial("0", &s).unwrap().is_zero());
    }
}
