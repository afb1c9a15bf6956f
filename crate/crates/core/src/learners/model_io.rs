//! Plain-text model files.
//!
//! A file is a header line followed by `key value...` lines; `#` starts a
//! comment line. Numbers are written in shortest round-trip exponent form,
//! so a saved model predicts bit-for-bit like the original.
//!
//! ```text
//! respclass-model 1
//! classifier score-threshold
//! scorer linear
//! weights 1.5e0 -2e-1
//! bias 3e-2
//! ```

use std::fmt::Write as _;
use std::io::{Read, Write};

use super::classifier::{OutcomeModel, ResponderClassifier};
use super::kernel::KernelSpec;
use super::mlp::{Head, MlpScorer};
use super::scorer::{KernelScorer, LinearScorer, Scorer};
use crate::data::{Sign, Theta};
use crate::error::{Error, Result};

pub const HEADER: &str = "respclass-model 1";

fn nums(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
}

fn write_linear(out: &mut String, lin: &LinearScorer) {
    let _ = writeln!(out, "weights {}", nums(&lin.weights));
    let _ = writeln!(out, "bias {:e}", lin.bias);
}

fn write_scorer(out: &mut String, scorer: &Scorer) {
    match scorer {
        Scorer::Linear(lin) => {
            out.push_str("scorer linear\n");
            write_linear(out, lin);
        }
        Scorer::Kernel(k) => {
            out.push_str("scorer kernel\n");
            match k.kernel() {
                KernelSpec::Linear => out.push_str("kernel linear\n"),
                KernelSpec::Rbf { gamma } => {
                    let _ = writeln!(out, "kernel rbf {gamma:e}");
                }
            }
            let _ = writeln!(out, "dim {}", k.dim());
            let _ = writeln!(out, "support-vectors {}", k.num_support_vectors());
            for (i, coef) in k.dual_coefs().iter().enumerate() {
                let _ = writeln!(out, "sv {coef:e} {}", nums(k.support_vector(i)));
            }
            let _ = writeln!(out, "bias {:e}", k.bias());
        }
        Scorer::Mlp(net) => write_mlp(out, net),
    }
}

fn write_mlp(out: &mut String, net: &MlpScorer) {
    out.push_str("scorer mlp\n");
    let head = match net.head() {
        Head::Identity => "identity",
        Head::Sigmoid => "sigmoid",
    };
    let _ = writeln!(out, "head {head}");
    let sizes: Vec<String> = net.sizes().iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "layers {}", sizes.join(" "));
    let _ = writeln!(out, "params {}", nums(net.params()));
}

fn write_outcome(out: &mut String, arm: &str, model: &OutcomeModel) {
    match model {
        OutcomeModel::Logistic(lin) => {
            let _ = writeln!(out, "arm {arm} logistic");
            write_linear(out, lin);
        }
        OutcomeModel::Constant(p) => {
            let _ = writeln!(out, "arm {arm} constant {p:e}");
        }
    }
}

/// Renders a classifier in the model file format.
pub fn to_text(clf: &ResponderClassifier) -> String {
    let mut out = format!("{HEADER}\n");
    match clf {
        ResponderClassifier::ScoreThreshold(scorer) => {
            out.push_str("classifier score-threshold\n");
            write_scorer(&mut out, scorer);
        }
        ResponderClassifier::ProbThreshold { model, theta } => {
            out.push_str("classifier prob-threshold\n");
            let _ = writeln!(out, "theta {:e}", theta.value());
            write_mlp(&mut out, model);
        }
        ResponderClassifier::CatePlugin { treated, control, theta } => {
            out.push_str("classifier cate-plugin\n");
            let _ = writeln!(out, "theta {:e}", theta.value());
            write_outcome(&mut out, "treated", treated);
            write_outcome(&mut out, "control", control);
        }
        ResponderClassifier::Constant(sign) => {
            out.push_str("classifier constant\n");
            let _ = writeln!(out, "label {sign}");
        }
    }
    out
}

pub fn save<W: Write>(mut writer: W, clf: &ResponderClassifier) -> Result<()> {
    writer.write_all(to_text(clf).as_bytes())?;
    Ok(())
}

pub fn load<R: Read>(mut reader: R) -> Result<ResponderClassifier> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    from_text(&text)
}

/// Line cursor over the significant lines of a model file.
struct Cursor<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(|(i, l)| (i, l.split_whitespace().collect()))
            .collect();
        Self { lines, pos: 0 }
    }

    fn line_no(&self) -> usize {
        self.lines.get(self.pos).or(self.lines.last()).map_or(1, |(n, _)| *n)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line_no(), message: message.into() }
    }

    /// The next line, which must start with `key`; returns its arguments.
    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let Some((line, tokens)) = self.lines.get(self.pos) else {
            return Err(self.err(format!("unexpected end of file, expected `{key}`")));
        };
        if tokens[0] != key {
            return Err(self.err(format!("expected `{key}`, found `{}`", tokens[0])));
        }
        self.pos += 1;
        Ok((*line, tokens[1..].to_vec()))
    }

    fn finish(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            None => Ok(()),
            Some((line, tokens)) => Err(Error::Parse { line: *line, message: format!("unexpected `{}`", tokens[0]) }),
        }
    }
}

fn parse_f64(line: usize, token: &str) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse { line, message: format!("invalid number `{token}`") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("non-finite number `{token}`") });
    }
    Ok(v)
}

fn parse_usize(line: usize, token: &str) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse { line, message: format!("invalid count `{token}`") })
}

fn parse_all(line: usize, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens.iter().map(|t| parse_f64(line, t)).collect()
}

fn single<'t>(line: usize, key: &str, tokens: &[&'t str]) -> Result<&'t str> {
    match tokens {
        [one] => Ok(one),
        _ => Err(Error::Parse { line, message: format!("`{key}` takes exactly one value") }),
    }
}

fn read_theta(c: &mut Cursor<'_>) -> Result<Theta> {
    let (line, args) = c.expect("theta")?;
    let v = parse_f64(line, single(line, "theta", &args)?)?;
    Theta::new(v).map_err(|_| Error::Parse { line, message: format!("theta {v} outside [0, 1]") })
}

fn read_linear(c: &mut Cursor<'_>) -> Result<LinearScorer> {
    let (line, args) = c.expect("weights")?;
    let weights = parse_all(line, &args)?;
    if weights.is_empty() {
        return Err(Error::Parse { line, message: "no weights".into() });
    }
    let (line, args) = c.expect("bias")?;
    let bias = parse_f64(line, single(line, "bias", &args)?)?;
    Ok(LinearScorer { weights, bias })
}

fn read_mlp(c: &mut Cursor<'_>) -> Result<MlpScorer> {
    let (line, args) = c.expect("head")?;
    let head = match single(line, "head", &args)? {
        "identity" => Head::Identity,
        "sigmoid" => Head::Sigmoid,
        other => return Err(Error::Parse { line, message: format!("unknown head `{other}`") }),
    };
    let (line, args) = c.expect("layers")?;
    let sizes = args.iter().map(|t| parse_usize(line, t)).collect::<Result<Vec<_>>>()?;
    let (pline, args) = c.expect("params")?;
    let params = parse_all(pline, &args)?;
    MlpScorer::from_parts(sizes, params, head).map_err(|e| Error::Parse { line: pline, message: e.to_string() })
}

fn read_kernel(c: &mut Cursor<'_>) -> Result<KernelScorer> {
    let (line, args) = c.expect("kernel")?;
    let kernel = match args.as_slice() {
        ["linear"] => KernelSpec::Linear,
        ["rbf", g] => {
            KernelSpec::rbf(parse_f64(line, g)?).map_err(|e| Error::Parse { line, message: e.to_string() })?
        }
        _ => return Err(Error::Parse { line, message: "expected `kernel linear` or `kernel rbf <gamma>`".into() }),
    };
    let (line, args) = c.expect("dim")?;
    let d = parse_usize(line, single(line, "dim", &args)?)?;
    if d == 0 {
        return Err(Error::Parse { line, message: "dimension must be positive".into() });
    }
    let (line, args) = c.expect("support-vectors")?;
    let m = parse_usize(line, single(line, "support-vectors", &args)?)?;
    let (mut svs, mut coefs) = (Vec::with_capacity(m * d), Vec::with_capacity(m));
    for _ in 0..m {
        let (line, args) = c.expect("sv")?;
        if args.len() != d + 1 {
            return Err(Error::Parse { line, message: format!("support vector needs 1 + {d} values") });
        }
        let values = parse_all(line, &args)?;
        coefs.push(values[0]);
        svs.extend_from_slice(&values[1..]);
    }
    let (line, args) = c.expect("bias")?;
    let bias = parse_f64(line, single(line, "bias", &args)?)?;
    Ok(KernelScorer::new(d, svs, coefs, bias, kernel))
}

fn read_scorer(c: &mut Cursor<'_>) -> Result<Scorer> {
    let (line, args) = c.expect("scorer")?;
    match single(line, "scorer", &args)? {
        "linear" => read_linear(c).map(Scorer::Linear),
        "kernel" => read_kernel(c).map(Scorer::Kernel),
        "mlp" => read_mlp(c).map(Scorer::Mlp),
        other => Err(Error::Parse { line, message: format!("unknown scorer `{other}`") }),
    }
}

fn read_arm(c: &mut Cursor<'_>, name: &str) -> Result<OutcomeModel> {
    let (line, args) = c.expect("arm")?;
    match args.as_slice() {
        [arm, "logistic"] if *arm == name => read_linear(c).map(OutcomeModel::Logistic),
        [arm, "constant", p] if *arm == name => {
            let p = parse_f64(line, p)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parse { line, message: format!("probability {p} outside [0, 1]") });
            }
            Ok(OutcomeModel::Constant(p))
        }
        _ => Err(Error::Parse { line, message: format!("expected `arm {name} logistic|constant <p>`") }),
    }
}

pub fn from_text(text: &str) -> Result<ResponderClassifier> {
    let mut c = Cursor::new(text);
    match c.lines.first() {
        Some((_, tokens)) if tokens.join(" ") == HEADER => c.pos = 1,
        _ => return Err(c.err(format!("missing `{HEADER}` header"))),
    }
    let (line, args) = c.expect("classifier")?;
    let clf = match single(line, "classifier", &args)? {
        "score-threshold" => ResponderClassifier::ScoreThreshold(read_scorer(&mut c)?),
        "prob-threshold" => {
            let theta = read_theta(&mut c)?;
            let (line, args) = c.expect("scorer")?;
            if single(line, "scorer", &args)? != "mlp" {
                return Err(Error::Parse { line, message: "probability models must be `scorer mlp`".into() });
            }
            let model = read_mlp(&mut c)?;
            if model.head() != Head::Sigmoid {
                return Err(Error::Parse { line, message: "probability models need a sigmoid head".into() });
            }
            ResponderClassifier::ProbThreshold { model, theta }
        }
        "cate-plugin" => {
            let theta = read_theta(&mut c)?;
            let treated = read_arm(&mut c, "treated")?;
            let control = read_arm(&mut c, "control")?;
            if let (OutcomeModel::Logistic(a), OutcomeModel::Logistic(b)) = (&treated, &control) {
                if a.dim() != b.dim() {
                    return Err(c.err("arms disagree on dimension"));
                }
            }
            ResponderClassifier::CatePlugin { treated, control, theta }
        }
        "constant" => {
            let (line, args) = c.expect("label")?;
            let label = match single(line, "label", &args)? {
                "1" | "+1" => Sign::Pos,
                "-1" => Sign::Neg,
                other => return Err(Error::Parse { line, message: format!("label must be ±1, got `{other}`") }),
            };
            ResponderClassifier::Constant(label)
        }
        other => return Err(Error::Parse { line, message: format!("unknown classifier `{other}`") }),
    };
    c.finish()?;
    Ok(clf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::classifier::Classify;
    use proptest::prelude::*;

    fn probe() -> Vec<Vec<f64>> {
        (0..50).map(|i| vec![(i as f64 * 0.37).sin() * 3.0, (i as f64 * 1.1).cos() * 2.0]).collect()
    }

    fn assert_round_trip(clf: &ResponderClassifier) {
        let text = to_text(clf);
        let back = from_text(&text).unwrap();
        assert_eq!(&back, clf);
        for x in probe() {
            assert_eq!(back.margin(&x).to_bits(), clf.margin(&x).to_bits());
            assert_eq!(back.classify(&x), clf.classify(&x));
        }
        assert_eq!(to_text(&back), text);
    }

    #[test]
    fn every_kind_round_trips() {
        let lin = LinearScorer { weights: vec![0.1 + 0.2, -1e-300], bias: 1.0 / 3.0 };
        assert_round_trip(&ResponderClassifier::ScoreThreshold(Scorer::Linear(lin.clone())));
        let k = KernelScorer::new(2, vec![0.5, -0.25, 1e10, 3.0], vec![0.7, -0.7], -0.125, KernelSpec::Rbf { gamma: 0.3 });
        assert_round_trip(&ResponderClassifier::ScoreThreshold(Scorer::Kernel(k)));
        let kl = KernelScorer::new(2, vec![0.5, -0.25], vec![0.7], 0.0, KernelSpec::Linear);
        assert_round_trip(&ResponderClassifier::ScoreThreshold(Scorer::Kernel(kl)));
        let net = MlpScorer::glorot(&[2, 4, 2, 1], Head::Identity, 3).unwrap();
        assert_round_trip(&ResponderClassifier::ScoreThreshold(Scorer::Mlp(net)));
        let gen = MlpScorer::glorot(&[2, 1], Head::Sigmoid, 4).unwrap();
        assert_round_trip(&ResponderClassifier::ProbThreshold { model: gen, theta: Theta::new(0.3).unwrap() });
        assert_round_trip(&ResponderClassifier::CatePlugin {
            treated: OutcomeModel::Logistic(lin),
            control: OutcomeModel::Constant(0.25),
            theta: Theta::HALF,
        });
        assert_round_trip(&ResponderClassifier::Constant(Sign::Neg));
        assert_round_trip(&ResponderClassifier::Constant(Sign::Pos));
    }

    #[test]
    fn malformed_files_report_lines() {
        let cases = [
            ("", 1),
            ("respclass-model 2\n", 1),
            ("respclass-model 1\nclassifier tree\n", 2),
            ("respclass-model 1\nclassifier score-threshold\nscorer linear\nweights 1 x\nbias 0\n", 4),
            ("respclass-model 1\nclassifier score-threshold\nscorer linear\nweights 1\n", 4),
            ("respclass-model 1\n# c\n\nclassifier constant\nlabel 0\n", 5),
            ("respclass-model 1\nclassifier constant\nlabel 1\nextra 2\n", 4),
            ("respclass-model 1\nclassifier prob-threshold\ntheta 2\nscorer mlp\n", 3),
            ("respclass-model 1\nclassifier score-threshold\nscorer mlp\nhead identity\nlayers 2 1\nparams 1 2\n", 6),
            ("respclass-model 1\nclassifier score-threshold\nscorer linear\nweights inf\nbias 0\n", 4),
        ];
        for (text, want) in cases {
            match from_text(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    proptest! {
        #[test]
        fn linear_models_round_trip_bitwise(
            w in prop::collection::vec(-1e6f64..1e6, 1..6),
            b in -1e3f64..1e3,
        ) {
            let clf = ResponderClassifier::ScoreThreshold(Scorer::Linear(LinearScorer { weights: w, bias: b }));
            prop_assert_eq!(from_text(&to_text(&clf)).unwrap(), clf);
        }
    }
}
