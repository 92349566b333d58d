//! Text format:
//!
//! ```text
//! c optional comment lines
//! p sched <n> <m>
//! e <u> <v>
//! ```
//!
//! One header line, then one `e` line per precedence pair `u ≺ v`.

use std::fmt::Write as _;

use super::{Builder, Instance, InstanceError};

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut builder: Option<Builder> = None;
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r').trim();
        if trimmed.is_empty() || trimmed.starts_with('c') && (trimmed.len() == 1 || trimmed.as_bytes()[1] == b' ') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields.as_slice() {
            ["p", "sched", n, m] if builder.is_none() => {
                let n: usize = n.parse().map_err(|_| InstanceError::MalformedHeader { line })?;
                let m: usize = m.parse().map_err(|_| InstanceError::MalformedHeader { line })?;
                builder = Some(Builder::new(n, m).map_err(|_| InstanceError::MalformedHeader { line })?);
            }
            ["p", ..] => return Err(InstanceError::MalformedHeader { line }),
            ["e", u, v] => {
                let b = builder.as_mut().ok_or(InstanceError::MalformedHeader { line })?;
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|_| InstanceError::MalformedLine { line, text: trimmed.to_string() })
                };
                b.add_edge(parse(u)?, parse(v)?, line)?;
            }
            _ => return Err(InstanceError::MalformedLine { line, text: trimmed.to_string() }),
        }
    }
    builder.map(Builder::finish).ok_or(InstanceError::MalformedHeader { line: 1 })
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = format!("p sched {} {}\n", inst.n(), inst.m());
    for &(u, v) in inst.prec() {
        writeln!(out, "e {u} {v}").unwrap();
    }
    out
}

/// Parses the JSON mirror `{"n":…,"m":…,"prec":[[u,v],…]}`.
pub fn parse_instance_json(text: &str) -> Result<Instance, InstanceError> {
    serde_json::from_str(text).map_err(|e| InstanceError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_single_edge() {
        let inst = parse_instance("p sched 2 1\ne 1 2\n").unwrap();
        assert_eq!((inst.n(), inst.m()), (2, 1));
        assert_eq!(inst.prec(), &[(1, 2)]);
    }

    #[test]
    fn parses_edgeless() {
        let inst = parse_instance("p sched 3 2\n").unwrap();
        assert_eq!((inst.n(), inst.m()), (3, 2));
        assert!(inst.prec().is_empty());
    }

    #[test]
    fn rejects_two_cycle_naming_line() {
        assert_eq!(
            parse_instance("p sched 2 1\ne 1 2\ne 2 1\n").unwrap_err(),
            InstanceError::CycleDetected { line: 3, u: 2, v: 1 }
        );
    }

    #[test]
    fn distinct_errors() {
        assert_eq!(parse_instance("p sched x 1\n").unwrap_err(), InstanceError::MalformedHeader { line: 1 });
        assert_eq!(parse_instance("e 1 2\n").unwrap_err(), InstanceError::MalformedHeader { line: 1 });
        assert_eq!(parse_instance("p sched 0 1\n").unwrap_err(), InstanceError::MalformedHeader { line: 1 });
        assert_eq!(
            parse_instance("p sched 2 1\ne 1 3\n").unwrap_err(),
            InstanceError::JobOutOfRange { line: 2, job: 3, n: 2 }
        );
        assert!(matches!(parse_instance("p sched 2 1\nx\n"), Err(InstanceError::MalformedLine { line: 2, .. })));
        assert_eq!(parse_instance("").unwrap_err(), InstanceError::MalformedHeader { line: 1 });
    }

    #[test]
    fn comments_are_skipped() {
        let inst = parse_instance("c a diamond\np sched 4 2\nc edges\ne 1 2\ne 1 3\ne 2 4\ne 3 4\n").unwrap();
        assert_eq!(inst.prec().len(), 4);
    }

    #[test]
    fn serializes_exactly() {
        let inst = parse_instance("p sched 3 2\ne 1 3\ne 2 3\n").unwrap();
        assert_eq!(serialize_instance(&inst), "p sched 3 2\ne 1 3\ne 2 3\n");
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(n in 1usize..12, m in 1usize..4, edges in proptest::collection::vec((1usize..12, 1usize..12), 0..30)) {
            let pairs: Vec<(usize, usize)> = edges
                .into_iter()
                .filter(|&(u, v)| u <= n && v <= n && u < v)
                .collect();
            let inst = Instance::new(n, m, pairs).unwrap();
            prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
        }
    }
}
