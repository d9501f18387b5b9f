//! Line-oriented text form of a code.
//!
//! ```text
//! feinstein-code v1
//! n 3
//! epsilon 0.2
//! codeword-alphabet 0 1
//! region-alphabet 0 1
//! entries 1
//! entry 0
//! codeword 0.0.0
//! region 2
//! 0.0.0
//! 0.0.1
//! ```
//!
//! `epsilon` is written with the shortest representation that parses back
//! to the same `f64`.

use std::fmt;
use std::str::FromStr;

use super::{CodeEntry, FeinsteinCode};
use crate::error::{Error, Result};
use crate::model::seq::{index_to_seq, seq_to_index};
use crate::model::Alphabet;

const MAGIC: &str = "feinstein-code v1";

impl fmt::Display for FeinsteinCode {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.region_alphabet.len();
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "n {}", self.n)?;
        writeln!(out, "epsilon {}", self.epsilon)?;
        writeln!(out, "codeword-alphabet {}", self.codeword_alphabet.symbols().join(" "))?;
        writeln!(out, "region-alphabet {}", self.region_alphabet.symbols().join(" "))?;
        writeln!(out, "entries {}", self.entries.len())?;
        for (i, e) in self.entries.iter().enumerate() {
            writeln!(out, "entry {i}")?;
            writeln!(out, "codeword {}", self.codeword_alphabet.format_seq(&e.codeword))?;
            writeln!(out, "region {}", e.region.len())?;
            for &z in &e.region {
                writeln!(out, "{}", self.region_alphabet.format_seq(&index_to_seq(z, q, self.n)))?;
            }
        }
        Ok(())
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok(line)
            }
            None => Err(self.fail("unexpected end of file")),
        }
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::Format { line: self.last, message: message.into() }
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ if line == key => Ok(""),
            _ => Err(self.fail(format!("expected '{key} ...'"))),
        }
    }

    fn number<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse().map_err(|_| self.fail(format!("bad {key} value {v:?}")))
    }

    fn wrap<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| self.fail(e.to_string()))
    }
}

impl FeinsteinCode {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
        if lines.next()? != MAGIC {
            return Err(lines.fail(format!("expected header {MAGIC:?}")));
        }
        let n: usize = lines.number("n")?;
        let epsilon: f64 = lines.number("epsilon")?;
        let cw = lines.field("codeword-alphabet")?;
        let cw = lines.wrap(Alphabet::new(cw.split(' ')))?;
        let ra = lines.field("region-alphabet")?;
        let ra = lines.wrap(Alphabet::new(ra.split(' ')))?;
        let count: usize = lines.number("entries")?;
        let mut entries = Vec::with_capacity(count.min(1 << 16));
        for i in 0..count {
            let idx: usize = lines.number("entry")?;
            if idx != i {
                return Err(lines.fail(format!("expected entry {i}")));
            }
            let word = lines.field("codeword")?;
            let codeword = lines.wrap(cw.parse_seq(word))?;
            let size: usize = lines.number("region")?;
            let mut region = Vec::with_capacity(size.min(1 << 20));
            for _ in 0..size {
                let line = lines.next()?;
                let z = lines.wrap(ra.parse_seq(line))?;
                if z.len() != n {
                    return Err(lines.fail(format!("region member of length {} in a length-{n} code", z.len())));
                }
                region.push(seq_to_index(&z, ra.len()));
            }
            entries.push(CodeEntry { codeword, region });
        }
        if let Ok(extra) = lines.next() {
            if !extra.is_empty() {
                return Err(lines.fail("trailing content"));
            }
        }
        let code = FeinsteinCode::new(n, epsilon, cw, ra, entries);
        code.map_err(|e| Error::Format { line: lines.last, message: e.to_string() })
    }
}

impl FromStr for FeinsteinCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeinsteinCode::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> FeinsteinCode {
        let b = Alphabet::binary();
        let c = Alphabet::new(["lo", "mid", "hi"]).unwrap();
        let entries = vec![
            CodeEntry { codeword: vec![0, 1], region: vec![0, 4, 8] },
            CodeEntry { codeword: vec![1, 1], region: vec![2] },
        ];
        FeinsteinCode::new(2, 0.1 + 0.2, b, c, entries).unwrap()
    }

    #[test]
    fn text_layout() {
        let text = sample().to_string();
        let expected = "feinstein-code v1\nn 2\nepsilon 0.30000000000000004\ncodeword-alphabet 0 1\n\
            region-alphabet lo mid hi\nentries 2\nentry 0\ncodeword 0.1\nregion 3\nlo.lo\nmid.mid\nhi.hi\n\
            entry 1\ncodeword 1.1\nregion 1\nlo.hi\n";
        assert_eq!(text, expected);
        assert_eq!(FeinsteinCode::parse(&text).unwrap(), sample());
    }

    #[test]
    fn errors_name_the_line() {
        let text = sample().to_string().replace("region 3", "region x");
        assert_eq!(
            FeinsteinCode::parse(&text),
            Err(Error::Format { line: 9, message: "bad region value \"x\"".into() })
        );
        let text = sample().to_string().replace("hi.hi", "hi.up");
        assert!(matches!(FeinsteinCode::parse(&text), Err(Error::Format { line: 12, .. })));
        let text = sample().to_string().replace("lo.hi", "lo.lo");
        assert!(matches!(FeinsteinCode::parse(&text), Err(Error::Format { .. })));
        assert!(FeinsteinCode::parse("").is_err());
        let truncated: String = sample().to_string().lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(FeinsteinCode::parse(&truncated).is_err());
    }

    fn arb_code() -> impl Strategy<Value = FeinsteinCode> {
        (1usize..4, 2usize..4, 2usize..4, 1e-6f64..0.999).prop_flat_map(|(n, nb, nc, eps)| {
            let words = (nb as u64).pow(n as u32);
            let outs = (nc as u64).pow(n as u32);
            (
                Just((n, nb, nc, eps)),
                proptest::sample::subsequence((0..words).collect::<Vec<_>>(), 0..=words as usize),
                proptest::collection::vec(0usize..5, outs as usize),
            )
                .prop_map(|((n, nb, nc, eps), words, owner)| {
                    let entries = words
                        .iter()
                        .enumerate()
                        .map(|(i, &w)| CodeEntry {
                            codeword: index_to_seq(w, nb, n),
                            region: (0..owner.len() as u64).filter(|&z| owner[z as usize] == i).collect(),
                        })
                        .collect();
                    let cw = Alphabet::numeric(nb).unwrap();
                    let ra = Alphabet::new((0..nc).map(|c| format!("z{c}"))).unwrap();
                    FeinsteinCode::new(n, eps, cw, ra, entries).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn round_trip(code in arb_code()) {
            let text = code.to_string();
            let back = FeinsteinCode::parse(&text).unwrap();
            prop_assert_eq!(back.to_string(), text);
            prop_assert_eq!(back, code);
        }
    }
}
