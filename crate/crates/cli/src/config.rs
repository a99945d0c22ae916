//! `key=value` experiment configs.
//!
//! Pairs are separated by whitespace or newlines; `#` starts a comment.
//! Every key is validated against the schema of its command, and all
//! problems are reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Hilbert,
    Symbols,
    Possio,
    Flowmap,
    Plate,
    Simulate,
    VerifyAll,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Hilbert,
        Command::Symbols,
        Command::Possio,
        Command::Flowmap,
        Command::Plate,
        Command::Simulate,
        Command::VerifyAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Hilbert => "hilbert",
            Command::Symbols => "symbols",
            Command::Possio => "possio",
            Command::Flowmap => "flowmap",
            Command::Plate => "plate",
            Command::Simulate => "simulate",
            Command::VerifyAll => "verify-all",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn schema(self) -> &'static [Key] {
        match self {
            Command::Hilbert => HILBERT,
            Command::Symbols => SYMBOLS,
            Command::Possio => POSSIO,
            Command::Flowmap => FLOWMAP,
            Command::Plate => PLATE,
            Command::Simulate => SIMULATE,
            Command::VerifyAll => VERIFY_ALL,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// Integer in `[min, max]`.
    Int(i64, i64),
    /// Finite real checked by a named rule.
    Real(Rule),
    /// One of the listed words.
    Word(&'static [&'static str]),
    /// Comma-separated reals, each checked by the rule.
    Reals(Rule),
    /// Comma-separated integers in `[min, max]`.
    Ints(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Any,
    Positive,
    NonNegative,
    /// `[0, 1)`.
    Subsonic,
    /// `(1, 2)`.
    Exponent,
}

impl Rule {
    fn check(self, key: &str, v: f64) -> Option<String> {
        let bad = match self {
            Rule::Any => false,
            Rule::Positive => !(v > 0.0),
            Rule::NonNegative => !(v >= 0.0),
            Rule::Subsonic => !(0.0..1.0).contains(&v),
            Rule::Exponent => !(v > 1.0 && v < 2.0),
        };
        bad.then(|| match self {
            Rule::Any => unreachable!(),
            Rule::Positive => format!("{key} must be positive"),
            Rule::NonNegative => format!("{key} must be non-negative"),
            Rule::Subsonic => format!("{key} must lie in [0,1)"),
            Rule::Exponent => format!("{key} must lie in (1,2)"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str) -> Key {
    Key { name, kind, default }
}

const NONLINEARITIES: &[&str] = &["none", "kirchhoff", "berger", "vonkarman"];

const HILBERT: &[Key] = &[key("n", Kind::Int(8, 4096), "64"), key("p", Kind::Real(Rule::Exponent), "1.5")];

const SYMBOLS: &[Key] = &[
    key("exponent", Kind::Real(Rule::Positive), "0.25"),
    key("alpha_min", Kind::Real(Rule::Positive), "0.1"),
    key("alpha_max", Kind::Real(Rule::Positive), "10"),
    key("alpha_n", Kind::Int(1, 10_000), "100"),
    key("eta_max", Kind::Real(Rule::Positive), "100"),
    key("eta_n", Kind::Int(1, 10_000), "100"),
    key("zu_max", Kind::Real(Rule::Positive), "100"),
    key("zu_n", Kind::Int(1, 10_000), "100"),
    key("alpha", Kind::Real(Rule::Positive), "1"),
    key("beta", Kind::Real(Rule::Any), "0"),
    key("U", Kind::Real(Rule::Subsonic), "0.5"),
];

const POSSIO: &[Key] = &[
    key("n", Kind::Int(8, 256), "32"),
    key("half_length", Kind::Real(Rule::Positive), "8"),
    key("points", Kind::Int(16, 1 << 20), "4096"),
    key("alpha", Kind::Real(Rule::Positive), "1"),
    key("betas", Kind::Reals(Rule::Any), "0,2,10"),
    key("U", Kind::Real(Rule::Subsonic), "0.5"),
    key("path", Kind::Word(&["direct", "decomposed"]), "decomposed"),
    key("downwash", Kind::Word(&["manufactured", "heave"]), "manufactured"),
];

const FLOWMAP: &[Key] = &[
    key("half_length", Kind::Real(Rule::Positive), "4"),
    key("depth", Kind::Real(Rule::Positive), "3"),
    key("h", Kind::Real(Rule::Positive), "0.25"),
    key("levels", Kind::Int(2, 6), "4"),
    key("U", Kind::Real(Rule::Subsonic), "0.5"),
    key("lambda", Kind::Real(Rule::Positive), "1"),
];

const PLATE: &[Key] = &[
    key("cells", Kind::Int(4, 4096), "32"),
    key("nonlinearity", Kind::Word(&["kirchhoff", "berger", "vonkarman"]), "kirchhoff"),
    key("cubic", Kind::Real(Rule::Any), "1"),
    key("linear", Kind::Real(Rule::Any), "-2"),
    key("kappa", Kind::Real(Rule::Positive), "1"),
    key("gamma", Kind::Real(Rule::Any), "0.5"),
    key("samples", Kind::Int(1, 10_000), "20"),
    key("c_max", Kind::Real(Rule::Positive), "10"),
];

const SIMULATE: &[Key] = &[
    key("half_length", Kind::Real(Rule::Positive), "8"),
    key("depth", Kind::Real(Rule::Positive), "4"),
    key("h", Kind::Real(Rule::Positive), "0.125"),
    key("U", Kind::Real(Rule::Subsonic), "0"),
    key("dt", Kind::Real(Rule::Positive), "0.001"),
    key("T", Kind::Real(Rule::NonNegative), "1"),
    key("amplitude", Kind::Real(Rule::Any), "1"),
    key("nonlinearity", Kind::Word(NONLINEARITIES), "none"),
    key("cubic", Kind::Real(Rule::Any), "1"),
    key("linear", Kind::Real(Rule::Any), "0"),
    key("kappa", Kind::Real(Rule::Positive), "1"),
    key("gamma", Kind::Real(Rule::Any), "0.5"),
];

const VERIFY_ALL: &[Key] = &[key("criteria", Kind::Ints(1, 11), "1,2,3,4,5,6,7,8,9,10,11")];

/// Keys accepted by every command.
const COMMON: &[&str] = &["command", "seed", "out"];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Word(String),
    Reals(Vec<f64>),
    Ints(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Every schema key, defaults filled in.
    pub parameters: BTreeMap<&'static str, Value>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn int(&self, k: &str) -> i64 {
        match self.parameters.get(k) {
            Some(Value::Int(v)) => *v,
            other => panic!("{k} is not an integer parameter: {other:?}"),
        }
    }

    pub fn real(&self, k: &str) -> f64 {
        match self.parameters.get(k) {
            Some(Value::Real(v)) => *v,
            other => panic!("{k} is not a real parameter: {other:?}"),
        }
    }

    pub fn word(&self, k: &str) -> &str {
        match self.parameters.get(k) {
            Some(Value::Word(v)) => v,
            other => panic!("{k} is not a word parameter: {other:?}"),
        }
    }

    pub fn reals(&self, k: &str) -> &[f64] {
        match self.parameters.get(k) {
            Some(Value::Reals(v)) => v,
            other => panic!("{k} is not a list parameter: {other:?}"),
        }
    }

    pub fn ints(&self, k: &str) -> &[i64] {
        match self.parameters.get(k) {
            Some(Value::Ints(v)) => v,
            other => panic!("{k} is not a list parameter: {other:?}"),
        }
    }

    /// `key=value` lines for the run manifest, in a fixed order.
    pub fn manifest_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("command={}", self.command),
            format!("seed={}", self.seed),
            format!("out={}", self.output_dir.display()),
        ];
        for (k, v) in &self.parameters {
            out.push(format!("{k}={}", render(v)));
        }
        out
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Real(r) => format!("{r}"),
        Value::Word(w) => w.clone(),
        Value::Reals(r) => r.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","),
        Value::Ints(r) => r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    }
}

/// All problems found in a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

fn parse_value(k: &Key, raw: &str) -> Result<Value, String> {
    let name = k.name;
    let real = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{name} must be a finite number, got '{s}'"))
    };
    let int = |s: &str, lo: i64, hi: i64| -> Result<i64, String> {
        let v = s.trim().parse::<i64>().map_err(|_| format!("{name} must be an integer, got '{s}'"))?;
        if v < lo || v > hi {
            return Err(format!("{name} must lie in [{lo},{hi}], got {v}"));
        }
        Ok(v)
    };
    match k.kind {
        Kind::Int(lo, hi) => int(raw, lo, hi).map(Value::Int),
        Kind::Real(rule) => {
            let v = real(raw)?;
            rule.check(name, v).map_or(Ok(Value::Real(v)), Err)
        }
        Kind::Word(words) => {
            if words.contains(&raw) {
                Ok(Value::Word(raw.to_string()))
            } else {
                Err(format!("{name} must be one of {}, got '{raw}'", words.join("|")))
            }
        }
        Kind::Reals(rule) => {
            let vs = raw.split(',').map(real).collect::<Result<Vec<_>, _>>()?;
            if vs.is_empty() {
                return Err(format!("{name} must not be empty"));
            }
            for v in &vs {
                if let Some(e) = rule.check(name, *v) {
                    return Err(e);
                }
            }
            Ok(Value::Reals(vs))
        }
        Kind::Ints(lo, hi) => raw.split(',').map(|s| int(s, lo, hi)).collect::<Result<Vec<_>, _>>().map(Value::Ints),
    }
}

/// Parses config text. Default output directory is `out`, default seed is
/// the acceptance seed.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            match token.split_once('=') {
                Some((k, v)) if !k.is_empty() => {
                    if pairs.iter().any(|(seen, _)| seen == k) {
                        errors.push(format!("duplicate key '{k}'"));
                    } else {
                        pairs.push((k.to_string(), v.to_string()));
                    }
                }
                _ => errors.push(format!("malformed entry '{token}', expected key=value")),
            }
        }
    }
    let lookup = |k: &str| pairs.iter().find(|(p, _)| p == k).map(|(_, v)| v.as_str());
    let command = match lookup("command") {
        None => {
            errors.push(format!(
                "missing required key 'command' (one of {})",
                Command::ALL.map(|c| c.name()).join(", ")
            ));
            None
        }
        Some(c) => {
            let parsed = Command::parse(c);
            if parsed.is_none() {
                errors.push(format!("unknown command '{c}'"));
            }
            parsed
        }
    };
    let seed = match lookup("seed") {
        None => kjplate::verify::DEFAULT_SEED,
        Some(s) => s.parse::<u64>().unwrap_or_else(|_| {
            errors.push(format!("seed must be a non-negative integer, got '{s}'"));
            0
        }),
    };
    let output_dir = PathBuf::from(lookup("out").unwrap_or("out"));
    let mut parameters = BTreeMap::new();
    if let Some(cmd) = command {
        let schema = cmd.schema();
        for (k, _) in &pairs {
            if !COMMON.contains(&k.as_str()) && !schema.iter().any(|s| s.name == k) {
                errors.push(format!("unknown key '{k}' for command {cmd}"));
            }
        }
        for s in schema {
            let raw = lookup(s.name).unwrap_or(s.default);
            match parse_value(s, raw) {
                Ok(v) => {
                    parameters.insert(s.name, v);
                }
                Err(e) => errors.push(e),
            }
        }
    }
    match command {
        Some(command) if errors.is_empty() => Ok(ExperimentConfig { command, parameters, output_dir, seed }),
        _ => Err(ConfigErrors(errors)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn happy_path() {
        let c = parse_config("command=symbols U=0.5 alpha=1.0").unwrap();
        assert_eq!(c.command, Command::Symbols);
        assert_eq!(c.real("U"), 0.5);
        assert_eq!(c.real("exponent"), 0.25);
    }

    #[test]
    fn supersonic_rejected() {
        let e = parse_config("command=simulate U=1.2").unwrap_err();
        assert_eq!(e.0, vec!["U must lie in [0,1)".to_string()]);
    }

    #[test]
    fn empty_lists_missing_command() {
        let e = parse_config("").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert!(e.0[0].contains("missing required key 'command'"));
    }

    #[test]
    fn all_errors_collected() {
        let e = parse_config("command=possio alpha=-1 U=1 colour=red\nstray").unwrap_err();
        assert_eq!(e.0.len(), 4, "{e}");
        assert!(e.0.iter().any(|m| m == "alpha must be positive"));
        assert!(e.0.iter().any(|m| m == "U must lie in [0,1)"));
        assert!(e.0.iter().any(|m| m.contains("unknown key 'colour'")));
        assert!(e.0.iter().any(|m| m.contains("malformed entry 'stray'")));
    }

    #[test]
    fn comments_lists_and_duplicates() {
        let c = parse_config("# run\ncommand=possio betas=0,2.5 # sweep\nseed=7").unwrap();
        assert_eq!(c.reals("betas"), &[0.0, 2.5]);
        assert_eq!(c.seed, 7);
        assert!(parse_config("command=plate cells=8 cells=9").is_err());
        assert!(parse_config("command=verify-all criteria=1,12").is_err());
    }
}
