//! Plain-text checkpoints of a [`TimeState`].
//!
//! ```text
//! hho-flow checkpoint 1
//! step <n>
//! time <t>
//! dt <dt>
//! velocity <len>
//! <one value per line>
//! previous <len>
//! ...
//! pressure <len>
//! ...
//! ```
//! Values are written in the shortest form that reads back bit-exactly.

use std::io::{BufRead, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::solver::TimeState;

pub const CHECKPOINT_HEADER: &str = "hho-flow checkpoint 1";

pub fn write_checkpoint(state: &TimeState, mut out: impl Write) -> Result<()> {
    writeln!(out, "{CHECKPOINT_HEADER}")?;
    writeln!(out, "step {}", state.step)?;
    writeln!(out, "time {}", state.time)?;
    writeln!(out, "dt {}", state.dt)?;
    for (name, v) in [("velocity", &state.velocity), ("previous", &state.previous), ("pressure", &state.pressure)] {
        writeln!(out, "{name} {}", v.len())?;
        for x in v.iter() {
            writeln!(out, "{x}")?;
        }
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: message.into() }
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let l = self.next()?;
        let value = l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')).ok_or_else(|| self.err(format!("expected `{key}`")))?;
        value.trim().parse().map_err(|_| self.err(format!("invalid value for `{key}`")))
    }

    fn vector(&mut self, key: &str) -> Result<DVector<f64>> {
        let n: usize = self.keyed(key)?;
        let mut v = DVector::zeros(n);
        for i in 0..n {
            let l = self.next()?;
            v[i] = l.trim().parse().map_err(|_| self.err("invalid number"))?;
        }
        Ok(v)
    }
}

pub fn read_checkpoint(input: impl BufRead) -> Result<TimeState> {
    let mut lines = Lines { inner: input.lines(), line: 0 };
    if lines.next()?.trim() != CHECKPOINT_HEADER {
        return Err(lines.err("unsupported checkpoint header"));
    }
    let step = lines.keyed("step")?;
    let time = lines.keyed("time")?;
    let dt = lines.keyed("dt")?;
    let velocity = lines.vector("velocity")?;
    let previous = lines.vector("previous")?;
    let pressure = lines.vector("pressure")?;
    Ok(TimeState { velocity, previous, pressure, time, dt, step })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let state = TimeState {
            velocity: DVector::from_vec(vec![0.1, -1.0 / 3.0, 1e-300]),
            previous: DVector::from_vec(vec![f64::MIN_POSITIVE, 2.5]),
            pressure: DVector::from_vec(vec![std::f64::consts::PI]),
            time: 0.123,
            dt: 1e-3,
            step: 7,
        };
        let mut buf = Vec::new();
        write_checkpoint(&state, &mut buf).unwrap();
        assert_eq!(read_checkpoint(buf.as_slice()).unwrap(), state);
    }

    #[test]
    fn bad_header_and_truncation() {
        assert!(matches!(read_checkpoint("hello\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        let text = format!("{CHECKPOINT_HEADER}\nstep 1\ntime 0\ndt 1\nvelocity 2\n1.0\n");
        assert!(matches!(read_checkpoint(text.as_bytes()), Err(Error::Parse { line: 7, .. })));
    }
}
