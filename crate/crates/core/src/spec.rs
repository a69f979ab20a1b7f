//! Text form of profiles: `kind(arg, name=value, ...)`.
//!
//! ```text
//! constant(1)
//! gaussian(amplitude=2, width=0.5, derivative=numeric)
//! tabulated(path="rho.csv")
//! escape-velocity(sign=-1)
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::profiles::{DerivativeSource, InitialData, ProblemConfig, ProfileKind, RadialProfile, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum SpecSource {
    Family(ProfileKind),
    Tabulated(PathBuf),
    /// Velocity only: `±sqrt(2 λ m0 / ((n-2) r^(n-2)))`.
    Escape { sign: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub source: SpecSource,
    pub derivative: DerivativeSource,
}

const FAMILIES: &[(&str, &[&str])] = &[
    ("zero", &[]),
    ("constant", &["value"]),
    ("exponential-decay", &["amplitude", "rate"]),
    ("rational-decay", &["amplitude", "scale", "power"]),
    ("gaussian", &["amplitude", "width"]),
    ("compact-bump", &["amplitude", "radius"]),
    ("power-times-sine", &["amplitude", "power", "frequency"]),
    ("power", &["amplitude", "power"]),
    ("damped-sine", &["amplitude"]),
    ("tabulated", &["path"]),
    ("escape-velocity", &["sign"]),
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Open,
    Close,
    Comma,
    Eq,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                out.push(Tok::Open);
                i += 1
            }
            b')' => {
                out.push(Tok::Close);
                i += 1
            }
            b',' => {
                out.push(Tok::Comma);
                i += 1
            }
            b'=' => {
                out.push(Tok::Eq);
                i += 1
            }
            b'"' => {
                let end = s[i + 1..].find('"').ok_or_else(|| Error::Profile("unterminated string".into()))?;
                out.push(Tok::Str(s[i + 1..i + 1 + end].to_string()));
                i += end + 2;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'-' || b[i] == b'_') {
                    i += 1;
                }
                out.push(Tok::Ident(s[start..i].to_ascii_lowercase()));
            }
            c if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' => {
                let start = i;
                i += 1;
                while i < b.len() {
                    let d = b[i];
                    let exp_sign = (d == b'-' || d == b'+') && matches!(b[i - 1], b'e' | b'E');
                    if d.is_ascii_digit() || d == b'.' || d == b'e' || d == b'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text = &s[start..i];
                let v = f64::from_str(text).ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Profile(format!("bad number '{text}'")))?;
                out.push(Tok::Num(v));
            }
            _ => {
                let ch = s[i..].chars().next().unwrap_or('?');
                return Err(Error::Profile(format!("unexpected character '{ch}' at offset {i}")));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Str(String),
    Ident(String),
}

fn parse_args(toks: &[Tok]) -> Result<Vec<(Option<String>, Value)>> {
    let mut args = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let (name, at) = match (&toks[i], toks.get(i + 1)) {
            (Tok::Ident(n), Some(Tok::Eq)) => (Some(n.clone()), i + 2),
            _ => (None, i),
        };
        let value = match toks.get(at) {
            Some(Tok::Num(v)) => Value::Num(*v),
            Some(Tok::Str(s)) => Value::Str(s.clone()),
            Some(Tok::Ident(s)) => Value::Ident(s.clone()),
            other => return Err(Error::Profile(format!("expected a value, found {other:?}"))),
        };
        args.push((name, value));
        i = at + 1;
        match toks.get(i) {
            None => {}
            Some(Tok::Comma) if i + 1 < toks.len() => i += 1,
            Some(t) => return Err(Error::Profile(format!("expected ',' between arguments, found {t:?}"))),
        }
    }
    Ok(args)
}

impl FromStr for ProfileSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = lex(s)?;
        let name = match toks.first() {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return Err(Error::Profile(format!("expected a profile kind in '{s}'"))),
        };
        let params = FAMILIES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::Profile(format!("unknown profile kind '{name}'")))?;
        let args = match &toks[1..] {
            [] => Vec::new(),
            [Tok::Open, inner @ .., Tok::Close] => parse_args(inner)?,
            _ => return Err(Error::Profile(format!("malformed argument list in '{s}'"))),
        };

        let mut slots: Vec<Option<Value>> = vec![None; params.len()];
        let mut derivative = DerivativeSource::Analytic;
        let mut positional = 0;
        let mut seen_named = false;
        for (key, value) in args {
            match key.as_deref() {
                Some("derivative") => {
                    derivative = match value {
                        Value::Ident(ref v) | Value::Str(ref v) if v == "numeric" => DerivativeSource::Numeric,
                        Value::Ident(ref v) | Value::Str(ref v) if v == "analytic" => DerivativeSource::Analytic,
                        other => return Err(Error::Profile(format!("derivative must be analytic or numeric, got {other:?}"))),
                    };
                }
                Some(k) => {
                    seen_named = true;
                    let idx = params
                        .iter()
                        .position(|p| *p == k)
                        .ok_or_else(|| Error::Profile(format!("{name} has no parameter '{k}'")))?;
                    if slots[idx].replace(value).is_some() {
                        return Err(Error::Profile(format!("parameter '{k}' given twice")));
                    }
                }
                None => {
                    if seen_named {
                        return Err(Error::Profile("positional argument after named argument".into()));
                    }
                    if positional >= params.len() {
                        return Err(Error::Profile(format!("{name} takes {} arguments", params.len())));
                    }
                    slots[positional] = Some(value);
                    positional += 1;
                }
            }
        }
        let num = |i: usize| -> Result<f64> {
            match &slots[i] {
                Some(Value::Num(v)) => Ok(*v),
                Some(other) => Err(Error::Profile(format!("{}: '{}' must be a number, got {other:?}", name, params[i]))),
                None => Err(Error::Profile(format!("{}: missing '{}'", name, params[i]))),
            }
        };
        let source = match name.as_str() {
            "zero" => SpecSource::Family(ProfileKind::Constant { value: 0.0 }),
            "constant" => SpecSource::Family(ProfileKind::Constant { value: num(0)? }),
            "exponential-decay" => SpecSource::Family(ProfileKind::ExponentialDecay { amplitude: num(0)?, rate: num(1)? }),
            "rational-decay" => SpecSource::Family(ProfileKind::RationalDecay {
                amplitude: num(0)?,
                scale: num(1)?,
                power: num(2)?,
            }),
            "gaussian" => SpecSource::Family(ProfileKind::Gaussian { amplitude: num(0)?, width: num(1)? }),
            "compact-bump" => SpecSource::Family(ProfileKind::CompactBump { amplitude: num(0)?, radius: num(1)? }),
            "power-times-sine" => SpecSource::Family(ProfileKind::PowerTimesSine {
                amplitude: num(0)?,
                power: num(1)?,
                frequency: num(2)?,
            }),
            "power" => SpecSource::Family(ProfileKind::Power { amplitude: num(0)?, power: num(1)? }),
            "damped-sine" => SpecSource::Family(ProfileKind::DampedSine { amplitude: num(0)? }),
            "tabulated" => match &slots[0] {
                Some(Value::Str(p)) => SpecSource::Tabulated(PathBuf::from(p)),
                _ => return Err(Error::Profile("tabulated needs path=\"...\"".into())),
            },
            "escape-velocity" => {
                let sign = if slots[0].is_some() { num(0)? } else { 1.0 };
                if sign != 1.0 && sign != -1.0 {
                    return Err(Error::Profile(format!("escape-velocity sign must be 1 or -1, got {sign}")));
                }
                if derivative == DerivativeSource::Numeric {
                    return Err(Error::Profile("escape-velocity has a closed-form derivative only".into()));
                }
                SpecSource::Escape { sign }
            }
            _ => unreachable!(),
        };
        let spec = Self { source, derivative };
        if let SpecSource::Family(kind) = &spec.source {
            // Reject bad parameters at parse time.
            RadialProfile::new(kind.clone())?;
        }
        Ok(spec)
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = match &self.source {
            SpecSource::Family(k) => match *k {
                ProfileKind::Constant { value } => return finish(f, "constant", &[format!("{value:?}")], self.derivative),
                ProfileKind::ExponentialDecay { amplitude, rate } => vec![format!("{amplitude:?}"), format!("{rate:?}")],
                ProfileKind::RationalDecay { amplitude, scale, power } => vec![format!("{amplitude:?}"), format!("{scale:?}"), format!("{power:?}")],
                ProfileKind::Gaussian { amplitude, width } => vec![format!("{amplitude:?}"), format!("{width:?}")],
                ProfileKind::CompactBump { amplitude, radius } => vec![format!("{amplitude:?}"), format!("{radius:?}")],
                ProfileKind::PowerTimesSine { amplitude, power, frequency } => {
                    vec![format!("{amplitude:?}"), format!("{power:?}"), format!("{frequency:?}")]
                }
                ProfileKind::Power { amplitude, power } => vec![format!("{amplitude:?}"), format!("{power:?}")],
                ProfileKind::DampedSine { amplitude } => vec![format!("{amplitude:?}")],
                ProfileKind::Tabulated(_) => vec![],
            },
            SpecSource::Tabulated(p) => return finish(f, "tabulated", &[format!("path=\"{}\"", p.display())], self.derivative),
            SpecSource::Escape { sign } => return finish(f, "escape-velocity", &[format!("sign={sign:?}")], self.derivative),
        };
        let name = match &self.source {
            SpecSource::Family(k) => k.name(),
            _ => unreachable!(),
        };
        finish(f, name, &args, self.derivative)
    }
}

fn finish(f: &mut fmt::Formatter<'_>, name: &str, args: &[String], d: DerivativeSource) -> fmt::Result {
    let mut all = args.to_vec();
    if d == DerivativeSource::Numeric {
        all.push("derivative=numeric".into());
    }
    write!(f, "{name}({})", all.join(", "))
}

impl ProfileSpec {
    /// Build the profile, resolving relative table paths against `base`.
    pub fn to_profile(&self, base: &Path) -> Result<RadialProfile> {
        let kind = match &self.source {
            SpecSource::Family(k) => k.clone(),
            SpecSource::Tabulated(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Profile(format!("cannot read table {}: {e}", path.display())))?;
                ProfileKind::Tabulated(Table::parse_csv(&text)?)
            }
            SpecSource::Escape { .. } => return Err(Error::Profile("escape-velocity is only valid as a velocity".into())),
        };
        Ok(RadialProfile::new(kind)?.with_derivative(self.derivative))
    }
}

/// Assemble initial data from density and velocity specs.
pub fn build_initial_data(density: &ProfileSpec, velocity: &ProfileSpec, cfg: ProblemConfig, base: &Path) -> Result<InitialData> {
    let rho = density.to_profile(base)?;
    match velocity.source {
        SpecSource::Escape { sign } => InitialData::escape(rho, cfg, sign),
        _ => InitialData::new(rho, velocity.to_profile(base)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ProfileSpec {
        s.parse().unwrap()
    }

    #[test]
    fn positional_and_named() {
        assert_eq!(p("gaussian(2, 0.5)"), p("gaussian(width=0.5, amplitude=2)"));
        assert_eq!(p("gaussian(2, width=0.5)"), p("gaussian(2,0.5)"));
        assert_eq!(p("constant(1)").source, SpecSource::Family(ProfileKind::Constant { value: 1.0 }));
        assert_eq!(p("zero"), p("constant(0)"));
        assert_eq!(p("exponential-decay(1, 1e-1, derivative=numeric)").derivative, DerivativeSource::Numeric);
        assert_eq!(p("escape-velocity(sign=-1)").source, SpecSource::Escape { sign: -1.0 });
        assert_eq!(p("tabulated(path=\"a b.csv\")").source, SpecSource::Tabulated("a b.csv".into()));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "wavelet(1)",
            "gaussian(1)",
            "gaussian(1, 2, 3)",
            "gaussian(amplitude=1, 2)",
            "gaussian(1, width=-1)",
            "constant(1",
            "constant(1,)",
            "constant(x)",
            "constant(1) extra",
            "constant(value=1, value=2)",
            "power(1, 5e400)",
            "gaussian(1, width=1e999)",
            "tabulated(3)",
            "escape-velocity(2)",
            "constant(nan)",
            "constant(1e400)",
            "constant(\"1)",
            "constant(1; 2)",
        ] {
            assert!(bad.parse::<ProfileSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "constant(1.5)",
            "rational-decay(1, 2, 0.75, derivative=numeric)",
            "power-times-sine(0.1, 2, 3)",
            "damped-sine(1e-3)",
            "tabulated(path=\"t.csv\")",
            "escape-velocity(sign=1)",
        ] {
            let a = p(s);
            assert_eq!(p(&a.to_string()), a, "{s} -> {a}");
        }
    }
}
