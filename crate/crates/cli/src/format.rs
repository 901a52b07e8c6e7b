//! Line-oriented instance format:
//!
//! ```text
//! MRF 1
//! <node_count> <L> <edge_count> <lambda>
//! <L unary values>            (node_count lines)
//! <p> <q>                     (edge_count blocks, each followed by
//! <L pairwise values>          L lines of L values)
//! constant <value>            (optional)
//! ```
//!
//! Reals are written with 17 significant digits, so files round-trip exactly.

use std::io::Write;

use mrf_core::{DiscreteEnergy, GraphTopology, Labeling};

use crate::{ParseError, ValidationError};

pub const MAGIC: &str = "MRF 1";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_instance<W: Write>(energy: &DiscreteEnergy, mut out: W) -> std::io::Result<()> {
    let l = energy.label_count();
    writeln!(out, "{MAGIC}")?;
    writeln!(
        out,
        "{} {} {} {}",
        energy.node_count(),
        l,
        energy.edge_count(),
        real(energy.lambda())
    )?;
    for p in 0..energy.node_count() {
        writeln!(out, "{}", join(energy.unary(p)))?;
    }
    for (e, &(p, q)) in energy.topology().edges().iter().enumerate() {
        writeln!(out, "{p} {q}")?;
        for row in energy.pairwise(e).chunks(l) {
            writeln!(out, "{}", join(row))?;
        }
    }
    if energy.constant() != 0.0 {
        writeln!(out, "constant {}", real(energy.constant()))?;
    }
    Ok(())
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| real(v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn instance_to_string(energy: &DiscreteEnergy) -> String {
    let mut buf = Vec::new();
    write_instance(energy, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

/// Non-blank lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if !t.is_empty() {
                return Ok((i + 1, t));
            }
        }
        Err(ParseError::new(
            self.last + 1,
            format!("unexpected end of file, expected {what}"),
        ))
    }

    fn remaining(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty())
    }
}

fn parse_fields<T: std::str::FromStr>(
    line: usize,
    text: &str,
    count: usize,
    what: &str,
) -> Result<Vec<T>, ParseError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(ParseError::new(
            line,
            format!("expected {count} {what}, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse()
                .map_err(|_| ParseError::new(line, format!("cannot parse `{f}` as {what}")))
        })
        .collect()
}

/// Parses an instance. Syntax problems are [`ParseError`]s; well-formed files
/// describing an invalid energy give a [`ValidationError`].
pub fn parse_instance(text: &str) -> anyhow::Result<DiscreteEnergy> {
    let mut lines = Lines::new(text);
    let (ln, magic) = lines.next_line("header")?;
    if magic != MAGIC {
        return Err(ParseError::new(ln, format!("expected `{MAGIC}`, found `{magic}`")).into());
    }
    let (ln, sizes) = lines.next_line("sizes")?;
    let fields: Vec<&str> = sizes.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(
            ParseError::new(ln, "expected `<node_count> <L> <edge_count> <lambda>`").into(),
        );
    }
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| ParseError::new(ln, format!("cannot parse `{s}` as a count")))
    };
    let (n, l, m) = (int(fields[0])?, int(fields[1])?, int(fields[2])?);
    let lambda: f64 = fields[3]
        .parse()
        .map_err(|_| ParseError::new(ln, format!("cannot parse `{}` as lambda", fields[3])))?;

    let mut unary = Vec::with_capacity(n * l);
    for _ in 0..n {
        let (ln, text) = lines.next_line("unary values")?;
        unary.extend(parse_fields::<f64>(ln, text, l, "unary values")?);
    }
    let mut edges = Vec::with_capacity(m);
    let mut pairwise = Vec::with_capacity(m * l * l);
    for _ in 0..m {
        let (ln, text) = lines.next_line("edge endpoints")?;
        let pq = parse_fields::<usize>(ln, text, 2, "node indices")?;
        edges.push((pq[0], pq[1]));
        for _ in 0..l {
            let (ln, text) = lines.next_line("pairwise values")?;
            pairwise.extend(parse_fields::<f64>(ln, text, l, "pairwise values")?);
        }
    }
    let mut constant = 0.0;
    if let Some((ln, text)) = lines.remaining() {
        match text.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["constant", v] => {
                constant = v
                    .parse()
                    .map_err(|_| ParseError::new(ln, format!("cannot parse `{v}` as constant")))?;
            }
            _ => {
                return Err(
                    ParseError::new(ln, format!("unexpected trailing content `{text}`")).into(),
                )
            }
        }
        if let Some((ln, text)) = lines.remaining() {
            return Err(
                ParseError::new(ln, format!("unexpected trailing content `{text}`")).into(),
            );
        }
    }

    let validation = |e: mrf_core::MrfError| ValidationError(e.to_string());
    let topo = GraphTopology::new(n, edges).map_err(validation)?;
    let energy = DiscreteEnergy::new(topo, l, unary, pairwise, lambda)
        .and_then(|e| e.with_constant(constant))
        .map_err(validation)?;
    Ok(energy)
}

pub fn write_labeling<W: Write>(x: &Labeling, mut out: W) -> std::io::Result<()> {
    for &l in x.iter() {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

pub fn parse_labeling(text: &str) -> Result<Labeling, ParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<usize>().map_err(|_| {
                ParseError::new(i + 1, format!("cannot parse `{}` as a label", l.trim()))
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Labeling::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DiscreteEnergy {
        let topo = GraphTopology::new(3, vec![(0, 1), (1, 2)]).unwrap();
        DiscreteEnergy::new(
            topo,
            2,
            vec![0.1, 0.2, 1.0 / 3.0, -4.5, 0.0, 1e-300],
            vec![0.0, 1.0, 1.0, 0.0, 0.7, -0.3, 2.0, 0.0],
            1.25,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let e = sample();
        assert_eq!(parse_instance(&instance_to_string(&e)).unwrap(), e);
        let c = sample().with_constant(12.5).unwrap();
        let text = instance_to_string(&c);
        assert!(text.ends_with("constant 1.2500000000000000e1\n"));
        assert_eq!(parse_instance(&text).unwrap(), c);
    }

    #[test]
    fn layout() {
        let text = instance_to_string(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "MRF 1");
        assert_eq!(lines[1], "3 2 2 1.2500000000000000e0");
        assert_eq!(lines.len(), 2 + 3 + 2 * 3);
        assert_eq!(lines[5], "0 1");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_instance("MRF 1\n1 2 0 1.0\n0.5\n").unwrap_err();
        let pe = err.downcast_ref::<ParseError>().unwrap();
        assert_eq!(pe.line, 3);
        let err = parse_instance("MRF 2\n").unwrap_err();
        assert_eq!(err.downcast_ref::<ParseError>().unwrap().line, 1);
        let err = parse_instance("MRF 1\n2 2 1 1.0\n0 0\n0 0\n1 1\n0 0\n0 0\n").unwrap_err();
        assert!(err.downcast_ref::<ValidationError>().is_some());
    }

    #[test]
    fn labeling_files() {
        let x = Labeling::new(vec![3, 0, 2]);
        let mut buf = Vec::new();
        write_labeling(&x, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "3\n0\n2\n");
        assert_eq!(
            parse_labeling(std::str::from_utf8(&buf).unwrap()).unwrap(),
            x
        );
        assert_eq!(parse_labeling("1\nx\n").unwrap_err().line, 2);
    }
}
