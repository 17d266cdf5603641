//! Plain-text grid snapshots.
//!
//! ```text
//! # phwc-grid 1
//! # dims 64 64
//! # cdim 3
//! x1 x2 re1 im1 re2 im2 re3 im3
//! ```
//!
//! followed by one whitespace-separated line per node in grid order.

use std::io::{self, BufRead, Write};

use num_complex::Complex64;

use super::GridMap;

pub fn write_snapshot(u: &GridMap, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "# phwc-grid 1")?;
    let dims: Vec<String> = u.dims().iter().map(|d| d.to_string()).collect();
    writeln!(out, "# dims {}", dims.join(" "))?;
    writeln!(out, "# cdim {}", u.cdim())?;
    for node in 0..u.nodes() {
        let mut fields: Vec<String> = u.coords(node).iter().map(|x| format!("{x:.17e}")).collect();
        for c in u.at(node) {
            fields.push(format!("{:.17e}", c.re));
            fields.push(format!("{:.17e}", c.im));
        }
        writeln!(out, "{}", fields.join(" "))?;
    }
    Ok(())
}

fn bad(message: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, message.into())
}

pub fn read_snapshot(input: impl BufRead) -> io::Result<GridMap> {
    let mut lines = input.lines();
    let mut header = |key: &str| -> io::Result<Vec<usize>> {
        let line = lines.next().ok_or_else(|| bad("truncated header"))??;
        let rest = line
            .strip_prefix("# ")
            .and_then(|l| l.strip_prefix(key))
            .ok_or_else(|| bad(format!("expected '# {key}' header line")))?;
        rest.split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("bad integer '{t}'"))))
            .collect()
    };
    if header("phwc-grid")? != [1] {
        return Err(bad("unsupported snapshot version"));
    }
    let dims = header("dims")?;
    let cdim = *header("cdim")?.first().ok_or_else(|| bad("missing cdim"))?;
    let m = dims.len();
    let mut values = Vec::new();
    for line in lines {
        let line = line?;
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("bad number '{t}'"))))
            .collect::<io::Result<_>>()?;
        if nums.len() != m + 2 * cdim {
            return Err(bad(format!(
                "expected {} fields, found {}",
                m + 2 * cdim,
                nums.len()
            )));
        }
        values.extend(nums[m..].chunks(2).map(|p| Complex64::new(p[0], p[1])));
    }
    GridMap::new(dims, cdim, values).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let u = GridMap::from_fn(vec![4, 3], 2, |x| {
            vec![
                Complex64::new(x[0].sin(), 0.1),
                Complex64::new(-x[1], x[0] * x[1]),
            ]
        })
        .unwrap();
        let mut buf = Vec::new();
        write_snapshot(&u, &mut buf).unwrap();
        let back = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, u);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3 + 12);
    }
}
