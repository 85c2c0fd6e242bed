use std::io::{BufRead, Write};

use num_complex::Complex;

use super::{EndoField, TorusError, TorusGrid, Twist};
use crate::linalg::CMat;
use crate::Real;

const HEADER: &str = "N,tau_re,tau_im,rank,degree";

/// Contents of a grid dump, kept in `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvGrid {
    pub n: usize,
    pub tau: Complex<f64>,
    pub rank: usize,
    pub degree: i64,
    pub data: Vec<CMat<f64>>,
}

impl CsvGrid {
    pub fn into_field<T: Real>(self) -> Result<EndoField<T>, TorusError> {
        let grid = TorusGrid::new(self.n, Complex::new(T::of(self.tau.re), T::of(self.tau.im)))?;
        let twist = Twist::new(self.rank, self.degree)?;
        let data = self.data.iter().map(|m| m.map(|z| Complex::new(T::of(z.re), T::of(z.im)))).collect();
        Ok(EndoField { grid, twist, data })
    }
}

/// Header row, a parameter row, then one row per node `(i, j)` in row-major order
/// holding the matrix entries row-major as `re, im` pairs.
pub fn write_csv<T: Real>(field: &EndoField<T>, mut w: impl Write) -> Result<(), TorusError> {
    let io = |e: std::io::Error| TorusError::Csv(e.to_string());
    let g = &field.grid;
    let tau = g.tau();
    writeln!(w, "{HEADER}").map_err(io)?;
    writeln!(
        w,
        "{},{},{},{},{}",
        g.n(),
        tau.re.to_f64(),
        tau.im.to_f64(),
        field.twist.rank(),
        field.twist.degree()
    )
    .map_err(io)?;
    for m in &field.data {
        let row: Vec<String> = m
            .transpose()
            .iter()
            .flat_map(|z| [z.re.to_f64().to_string(), z.im.to_f64().to_string()])
            .collect();
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    Ok(())
}

pub fn read_csv(r: impl BufRead) -> Result<CsvGrid, TorusError> {
    let bad = |line: usize, msg: &str| TorusError::Csv(format!("line {line}: {msg}"));
    let mut lines = r.lines().enumerate();
    let mut next = || -> Result<(usize, String), TorusError> {
        match lines.next() {
            Some((k, Ok(s))) => Ok((k + 1, s)),
            Some((k, Err(e))) => Err(bad(k + 1, &e.to_string())),
            None => Err(TorusError::Csv("unexpected end of file".into())),
        }
    };
    let (k, head) = next()?;
    let norm: String = head.chars().filter(|c| !c.is_whitespace()).collect();
    if norm != HEADER {
        return Err(bad(k, "expected header `N, tau_re, tau_im, rank, degree`"));
    }
    let (k, params) = next()?;
    let p: Vec<&str> = params.split(',').map(str::trim).collect();
    if p.len() != 5 {
        return Err(bad(k, "expected five parameters"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(k, &format!("bad number `{s}`")));
    let n: usize = p[0].parse().map_err(|_| bad(k, "bad N"))?;
    let tau = Complex::new(num(p[1])?, num(p[2])?);
    let rank: usize = p[3].parse().map_err(|_| bad(k, "bad rank"))?;
    let degree: i64 = p[4].parse().map_err(|_| bad(k, "bad degree"))?;
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let (k, row) = next()?;
        let vals = row
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(k, &format!("bad number `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != 2 * rank * rank {
            return Err(bad(k, &format!("expected {} values", 2 * rank * rank)));
        }
        data.push(CMat::from_row_iterator(
            rank,
            rank,
            vals.chunks(2).map(|c| Complex::new(c[0], c[1])),
        ));
    }
    Ok(CsvGrid { n, tau, rank, degree, data })
}
