//! A subset of the detector-error-model text format.
//!
//! One statement per line: `error <p> <targets...>` with targets `D<int>`
//! (detector) or `L<int>` (logical observable). `#` starts a comment. The
//! parenthesised form `error(<p>)` is accepted on input; output always uses
//! the space-separated form with targets sorted, detectors first.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use super::DetectorModel;
use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

pub fn parse_detector_model(text: &str, name: &str) -> Result<DetectorModel> {
    let mut det_cols: Vec<Vec<usize>> = Vec::new();
    let mut obs_cols: Vec<Vec<usize>> = Vec::new();
    let mut priors = Vec::new();
    let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    let mut num_det = 0usize;
    let mut num_obs = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (p_text, targets) = split_statement(line).ok_or_else(|| {
            Error::parse(name, lineno, format!("expected 'error <p> <targets>', got '{line}'"))
        })?;
        let p: f64 = p_text
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad probability '{p_text}'")))?;
        if !(p > 0.0 && p <= 0.5) {
            return Err(Error::parse(
                name,
                lineno,
                format!("probability {p} outside (0, 0.5]"),
            ));
        }
        let mut dets = Vec::new();
        let mut obs = Vec::new();
        for t in targets.split_whitespace() {
            let (kind, num) = t.split_at(1);
            let value: usize = num
                .parse()
                .map_err(|_| Error::parse(name, lineno, format!("bad target '{t}'")))?;
            match kind {
                "D" => dets.push(value),
                "L" => obs.push(value),
                _ => return Err(Error::parse(name, lineno, format!("bad target '{t}'"))),
            }
        }
        if dets.is_empty() && obs.is_empty() {
            return Err(Error::parse(name, lineno, "error statement without targets"));
        }
        for list in [&mut dets, &mut obs] {
            let before = list.len();
            list.sort_unstable();
            list.dedup();
            if list.len() != before {
                return Err(Error::parse(name, lineno, "repeated target"));
            }
        }
        if !seen.insert((dets.clone(), obs.clone())) {
            return Err(Error::parse(name, lineno, "duplicate error mechanism"));
        }
        if let Some(&d) = dets.last() {
            num_det = num_det.max(d + 1);
        }
        if let Some(&o) = obs.last() {
            num_obs = num_obs.max(o + 1);
        }
        det_cols.push(dets);
        obs_cols.push(obs);
        priors.push(p);
    }

    let noise_matrix = BinaryMatrix::from_columns(num_det, &det_cols)?;
    let observables = BinaryMatrix::from_columns(num_obs, &obs_cols)?;
    DetectorModel::new(noise_matrix, priors, observables)
}

fn split_statement(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix("error")?;
    if let Some(paren) = rest.strip_prefix('(') {
        let close = paren.find(')')?;
        return Some((paren[..close].trim(), &paren[close + 1..]));
    }
    if !rest.starts_with(char::is_whitespace) {
        return None;
    }
    let rest = rest.trim_start();
    let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
    Some((&rest[..end], &rest[end..]))
}

pub fn load_detector_model(path: impl AsRef<Path>) -> Result<DetectorModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detector_model(&text, &path.display().to_string())
}

/// Writes one `error` line per mechanism, in column order.
pub fn write_detector_model<W: Write>(model: &DetectorModel, mut out: W) -> std::io::Result<()> {
    for c in 0..model.num_mechanisms() {
        write!(out, "error {}", model.priors[c])?;
        for &d in model.noise_matrix.col(c) {
            write!(out, " D{d}")?;
        }
        for &o in model.observables.col(c) {
            write!(out, " L{o}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_detector_model(model: &DetectorModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_detector_model(model, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_detector() {
        let m = parse_detector_model("error 0.1 D0\n", "t").unwrap();
        assert_eq!((m.num_detectors(), m.num_mechanisms(), m.num_observables()), (1, 1, 0));
        assert_eq!(m.priors, vec![0.1]);
    }

    #[test]
    fn detectors_and_observable() {
        let m = parse_detector_model("error 0.2 D0 D1 L0\n", "t").unwrap();
        assert_eq!(m.noise_matrix.col(0), &[0, 1]);
        assert_eq!(m.observables.col(0), &[0]);
    }

    #[test]
    fn comments_blank_lines_and_paren_form() {
        let text = "# header\n\nerror(0.01) D3 L1  # trailing\nerror 0.02 D0\n";
        let m = parse_detector_model(text, "t").unwrap();
        assert_eq!(m.num_detectors(), 4);
        assert_eq!(m.num_observables(), 2);
        let mut out = Vec::new();
        write_detector_model(&m, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "error 0.01 D3 L1\nerror 0.02 D0\n");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("error 0.1 D0\nerror 0.1 D0\n", 2),
            ("error 0.1 D0\nerror 1.5 D1\n", 2),
            ("error 0 D1\n", 1),
            ("error 0.7 D1\n", 1),
            ("error 0.1 X1\n", 1),
            ("detector D0\n", 1),
            ("error 0.1\n", 1),
            ("\n\nerror abc D0\n", 3),
            ("error 0.1 D1 D1\n", 1),
            ("errorx 0.1 D1\n", 1),
        ];
        for (text, line) in cases {
            match parse_detector_model(text, "f.dem") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
