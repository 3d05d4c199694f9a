//! 8-bit binary PGM (P5) output with an affine value mapping, and input for
//! sample ingestion.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use dvp_core::directional::SquareImage;

/// Writes `img` to `path` and the `[min, max]` mapping to `path.txt`.
pub fn write_pgm(img: &SquareImage, path: &Path) -> io::Result<()> {
    let (lo, hi) = img.min_max();
    let span = hi - lo;
    let bytes: Vec<u8> = img
        .data
        .iter()
        .map(|&v| if span > 0.0 { ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8 } else { 0 })
        .collect();
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    write!(f, "P5\n{} {}\n255\n", img.size, img.size)?;
    f.write_all(&bytes)?;
    f.flush()?;
    let mut side = path.as_os_str().to_owned();
    side.push(".txt");
    fs::write(
        side,
        format!("width: {0}\nheight: {0}\nmin: {lo:.16e}\nmax: {hi:.16e}\nvalue = min + (max - min) * byte / 255\n", img.size),
    )
}

fn header_tokens(data: &[u8], count: usize) -> io::Result<(Vec<String>, usize)> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < data.len() && data[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < data.len() && data[i] == b'#' {
            while i < data.len() && data[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < data.len() && !data[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(bad("truncated PGM header"));
        }
        tokens.push(String::from_utf8_lossy(&data[start..i]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    Ok((tokens, i + 1))
}

/// Reads a square P5 image with values `byte / maxval` in `[0, 1]`.
pub fn read_pgm(path: &Path) -> io::Result<SquareImage> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let data = fs::read(path)?;
    let (t, start) = header_tokens(&data, 4)?;
    if t[0] != "P5" {
        return Err(bad(format!("expected P5, found {}", t[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("bad header field `{s}`: {e}")));
    let (w, h, maxval) = (num(&t[1])?, num(&t[2])?, num(&t[3])?);
    if w != h {
        return Err(bad(format!("image must be square, got {w}x{h}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(bad(format!("only 8-bit PGM is supported, maxval {maxval}")));
    }
    let raster = data.get(start..start + w * h).ok_or_else(|| bad("truncated PGM raster".into()))?;
    Ok(SquareImage { size: w, data: raster.iter().map(|&b| b as f64 / maxval as f64).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_bytes() {
        let dir = std::env::temp_dir().join(format!("dvp-pgm-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.pgm");
        let img = SquareImage { size: 2, data: vec![-1.0, 0.0, 1.0, 1.0] };
        write_pgm(&img, &path).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.data, vec![0.0, 128.0 / 255.0, 1.0, 1.0]);
        let side = fs::read_to_string(dir.join("a.pgm.txt")).unwrap();
        assert!(side.contains("min: -1.0"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
