//! CSV files for coefficients (`l,m,re,im`), sampled maps (`theta,phi,re,im`)
//! and filter blocks (`j,l,m,k,re,im`).
//!
//! Floats are written with 17 significant digits so files round-trip exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filter::FilterSpectrum;
use crate::harmonic::{flat_index, gauss_legendre_rule, HarmonicCoeffs, SphereGrid, SphereMap};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse<T: std::str::FromStr>(field: Option<&str>, what: &str, row: usize) -> Result<T> {
    let s = field.ok_or_else(|| Error::InvalidInput(format!("row {row}: missing {what}")))?;
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("row {row}: bad {what} '{s}'")))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::InvalidInput(format!(
            "expected header '{}', found '{}'",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

pub fn write_coeffs_to(w: impl Write, c: &HarmonicCoeffs) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["l", "m", "re", "im"])?;
    for (l, m, v) in c.iter() {
        wtr.write_record([l.to_string(), m.to_string(), fmt(v.re), fmt(v.im)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads coefficients in any row order. The bandlimit is one more than the
/// largest degree present; absent entries are zero.
pub fn read_coeffs_from(r: impl Read) -> Result<HarmonicCoeffs> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, &["l", "m", "re", "im"])?;
    let mut entries = BTreeMap::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let l: usize = parse(rec.get(0), "l", row + 1)?;
        let m: isize = parse(rec.get(1), "m", row + 1)?;
        let re: f64 = parse(rec.get(2), "re", row + 1)?;
        let im: f64 = parse(rec.get(3), "im", row + 1)?;
        if m.unsigned_abs() > l {
            return Err(Error::InvalidOrder { l, m });
        }
        if entries.insert(flat_index(l, m), Complex64::new(re, im)).is_some() {
            return Err(Error::InvalidInput(format!("duplicate entry (l={l}, m={m})")));
        }
    }
    let bandlimit = match entries.keys().next_back() {
        Some(&i) => (i as f64).sqrt() as usize + 1,
        None => return Err(Error::InvalidInput("coefficient file has no rows".into())),
    };
    let mut c = HarmonicCoeffs::zeros(bandlimit);
    for (i, v) in entries {
        c.values_mut()[i] = v;
    }
    Ok(c)
}

pub fn write_coeffs(path: &Path, c: &HarmonicCoeffs) -> Result<()> {
    write_coeffs_to(File::create(path)?, c)
}

pub fn read_coeffs(path: &Path) -> Result<HarmonicCoeffs> {
    read_coeffs_from(File::open(path)?)
}

pub fn write_map_to(w: impl Write, map: &SphereMap) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["theta", "phi", "re", "im"])?;
    let grid = map.grid();
    for (i, &theta) in grid.thetas().iter().enumerate() {
        for k in 0..grid.n_phi() {
            let v = map.get(i, k);
            wtr.write_record([fmt(theta), fmt(grid.phi(k)), fmt(v.re), fmt(v.im)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_map(path: &Path, map: &SphereMap) -> Result<()> {
    write_map_to(File::create(path)?, map)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

/// Recognizes the sampling of a map file: Gauss-Legendre rings or
/// equiangular midpoint rings, uniform longitudes starting at 0.
fn infer_grid(thetas: &[f64], phis: &[f64]) -> Result<SphereGrid> {
    let n_theta = thetas.len();
    let n_phi = phis.len();
    if phis.iter().enumerate().any(|(k, &p)| !close(p, 2.0 * PI * k as f64 / n_phi as f64)) {
        return Err(Error::InvalidInput("longitudes are not uniform from 0".into()));
    }
    let (nodes, _) = gauss_legendre_rule(n_theta);
    if nodes.iter().zip(thetas).all(|(x, &t)| close(x.acos(), t)) {
        if n_phi != 2 * n_theta - 1 {
            return Err(Error::InvalidInput(format!(
                "Gauss-Legendre rings need {} longitudes, found {n_phi}",
                2 * n_theta - 1
            )));
        }
        return SphereGrid::gauss_legendre(n_theta);
    }
    let mid = |i: usize| (i as f64 + 0.5) * PI / n_theta as f64;
    if thetas.iter().enumerate().all(|(i, &t)| close(t, mid(i))) {
        return SphereGrid::fejer(n_theta, n_phi);
    }
    Err(Error::InvalidInput(
        "colatitudes match neither Gauss-Legendre nor equiangular midpoint rings".into(),
    ))
}

/// Reads a map file written ring-major (θ ascending, φ ascending within a ring).
pub fn read_map_from(r: impl Read) -> Result<SphereMap> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, &["theta", "phi", "re", "im"])?;
    let mut rows = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let t: f64 = parse(rec.get(0), "theta", row + 1)?;
        let p: f64 = parse(rec.get(1), "phi", row + 1)?;
        let re: f64 = parse(rec.get(2), "re", row + 1)?;
        let im: f64 = parse(rec.get(3), "im", row + 1)?;
        rows.push((t, p, Complex64::new(re, im)));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("map file has no rows".into()));
    }
    let first_theta = rows[0].0;
    let n_phi = rows.iter().take_while(|r| r.0 == first_theta).count();
    if rows.len() % n_phi != 0 {
        return Err(Error::InvalidInput("rings have unequal sample counts".into()));
    }
    let phis: Vec<f64> = rows[..n_phi].iter().map(|r| r.1).collect();
    let mut thetas = Vec::new();
    for (ring, chunk) in rows.chunks(n_phi).enumerate() {
        let t = chunk[0].0;
        if chunk.iter().any(|r| r.0 != t) || chunk.iter().zip(&phis).any(|(r, &p)| r.1 != p) {
            return Err(Error::InvalidInput(format!("ring {ring} is not a full longitude sweep")));
        }
        thetas.push(t);
    }
    let grid = infer_grid(&thetas, &phis)?;
    SphereMap::new(grid, rows.into_iter().map(|r| r.2).collect())
}

pub fn read_map(path: &Path) -> Result<SphereMap> {
    read_map_from(File::open(path)?)
}

/// Writes `Ξ` entries as `j,l,m,k,re,im`, `m` the row and `k` the column order.
pub fn write_filter_to(w: impl Write, filt: &FilterSpectrum) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["j", "l", "m", "k", "re", "im"])?;
    for j in filt.j1()..=filt.j2() {
        for (l, block) in filt.coeffs(j)?.iter().enumerate() {
            let li = l as isize;
            for (mi, m) in (-li..=li).enumerate() {
                for (ki, k) in (-li..=li).enumerate() {
                    let v = block[(mi, ki)];
                    wtr.write_record([
                        j.to_string(),
                        l.to_string(),
                        m.to_string(),
                        k.to_string(),
                        fmt(v.re),
                        fmt(v.im),
                    ])?;
                }
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_filter(path: &Path, filt: &FilterSpectrum) -> Result<()> {
    write_filter_to(File::create(path)?, filt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{solve_filter, DegreeCovariance};
    use crate::harmonic::inverse_sht;
    use crate::testutil::random_coeffs;

    #[test]
    fn coefficients_round_trip_exactly() {
        let mut c = random_coeffs(9, 1);
        c.set(3, -2, Complex64::new(1.0 / 3.0, -2e-300)).unwrap();
        c.set(8, 8, Complex64::new(f64::MAX, f64::MIN_POSITIVE)).unwrap();
        let mut buf = Vec::new();
        write_coeffs_to(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("l,m,re,im\n0,0,"));
        assert_eq!(text.lines().count(), 82);
        let back = read_coeffs_from(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn sparse_unordered_coefficients() {
        let text = "l,m,re,im\n2,-1,0.5,0\n0,0,1,0\n";
        let c = read_coeffs_from(text.as_bytes()).unwrap();
        assert_eq!(c.bandlimit(), 3);
        assert_eq!(c.get(2, -1).unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(c.get(1, 1).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn malformed_coefficient_files() {
        for text in [
            "l,m,re\n0,0,1\n",
            "l,m,re,im\n1,2,0,0\n",
            "l,m,re,im\n0,0,1,0\n0,0,1,0\n",
            "l,m,re,im\n0,0,abc,0\n",
            "l,m,re,im\n",
        ] {
            assert!(read_coeffs_from(text.as_bytes()).is_err(), "{text}");
        }
    }

    #[test]
    fn maps_round_trip_with_grid_recovery() {
        let c = random_coeffs(6, 2);
        for grid in [SphereGrid::gauss_legendre(6).unwrap(), SphereGrid::fejer(12, 11).unwrap()] {
            let map = inverse_sht(&c, &grid).unwrap();
            let mut buf = Vec::new();
            write_map_to(&mut buf, &map).unwrap();
            let back = read_map_from(buf.as_slice()).unwrap();
            assert_eq!(back.grid().rule(), grid.rule());
            assert_eq!(back.samples(), map.samples());
        }
    }

    #[test]
    fn irregular_maps_rejected() {
        let text = "theta,phi,re,im\n0.1,0,1,0\n0.1,3.0,1,0\n0.5,0,1,0\n0.5,3.0,1,0\n";
        assert!(read_map_from(text.as_bytes()).is_err());
        let text = "theta,phi,re,im\n0.1,0,1,0\n0.1,3.141592653589793,1,0\n0.5,0,1,0\n";
        assert!(read_map_from(text.as_bytes()).is_err());
    }

    #[test]
    fn filter_export_layout() {
        let cs = DegreeCovariance::white(3, 1.0).unwrap();
        let cz = DegreeCovariance::white(3, 1.0).unwrap();
        let filt = solve_filter(&cs, &cz, 1, 2).unwrap();
        let mut buf = Vec::new();
        write_filter_to(&mut buf, &filt).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "j,l,m,k,re,im");
        assert_eq!(lines.len(), 1 + 2 * (1 + 9 + 25));
        assert!(lines[1].starts_with("1,0,0,0,"));
        assert!(lines.last().unwrap().starts_with("2,2,2,2,"));
    }
}
