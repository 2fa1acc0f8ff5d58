//! Depth masks on disk: PGM, both P2 (ASCII) and P5 (binary). Gray level is
//! the depth reading, 0 is background.

use crate::depth::DepthMask;
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("not a PGM file (magic {0:?})")]
    BadMagic(String),
    #[error("malformed header")]
    BadHeader,
    #[error("maxval {0} out of range 1..=65535")]
    BadMaxval(u32),
    #[error("sample value {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error("truncated pixel data")]
    Truncated,
    #[error("invalid mask: {0}")]
    Mask(#[from] crate::depth::DepthError),
}

/// Reads the next whitespace-delimited token, skipping `#` comments.
fn next_token<R: BufRead>(r: &mut R) -> Result<String, PgmError> {
    let mut tok = String::new();
    let mut in_comment = false;
    loop {
        let mut byte = [0u8; 1];
        match r.read_exact(&mut byte) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                if tok.is_empty() {
                    return Err(PgmError::BadHeader);
                }
                return Ok(tok);
            }
            Err(e) => return Err(e.into()),
        }
        let c = byte[0] as char;
        if in_comment {
            if c == '\n' {
                in_comment = false;
            }
            continue;
        }
        if c == '#' {
            in_comment = true;
            continue;
        }
        if c.is_whitespace() {
            if tok.is_empty() {
                continue;
            }
            return Ok(tok);
        }
        tok.push(c);
    }
}

fn parse_u32(tok: &str) -> Result<u32, PgmError> {
    tok.parse().map_err(|_| PgmError::BadHeader)
}

pub fn read_pgm<R: BufRead>(mut r: R) -> Result<DepthMask, PgmError> {
    let magic = next_token(&mut r)?;
    if magic != "P2" && magic != "P5" {
        return Err(PgmError::BadMagic(magic));
    }
    let width = parse_u32(&next_token(&mut r)?)? as usize;
    let height = parse_u32(&next_token(&mut r)?)? as usize;
    let maxval = parse_u32(&next_token(&mut r)?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::BadMaxval(maxval));
    }
    let count = width.checked_mul(height).ok_or(PgmError::BadHeader)?;

    let mut cells = Vec::with_capacity(count);
    if magic == "P2" {
        for _ in 0..count {
            let v = parse_u32(&next_token(&mut r).map_err(|_| PgmError::Truncated)?)?;
            if v > maxval {
                return Err(PgmError::SampleOutOfRange { value: v, maxval });
            }
            cells.push(v as u16);
        }
    } else {
        let bytes_per = if maxval > 255 { 2 } else { 1 };
        let mut buf = vec![0u8; count * bytes_per];
        r.read_exact(&mut buf).map_err(|_| PgmError::Truncated)?;
        for chunk in buf.chunks(bytes_per) {
            let v = if bytes_per == 2 {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u32
            } else {
                chunk[0] as u32
            };
            if v > maxval {
                return Err(PgmError::SampleOutOfRange { value: v, maxval });
            }
            cells.push(v as u16);
        }
    }
    Ok(DepthMask::new(width, height, cells)?)
}

/// Writes a mask as PGM; `binary` selects P5 over P2. The maxval is the
/// largest cell value (at least 1).
pub fn write_pgm<W: Write>(w: &mut W, mask: &DepthMask, binary: bool) -> Result<(), PgmError> {
    let maxval = mask.cells().iter().copied().max().unwrap_or(0).max(1);
    if binary {
        write!(w, "P5\n{} {}\n{}\n", mask.width(), mask.height(), maxval)?;
        if maxval > 255 {
            for &v in mask.cells() {
                w.write_all(&v.to_be_bytes())?;
            }
        } else {
            let bytes: Vec<u8> = mask.cells().iter().map(|&v| v as u8).collect();
            w.write_all(&bytes)?;
        }
    } else {
        write!(w, "P2\n{} {}\n{}\n", mask.width(), mask.height(), maxval)?;
        for y in 0..mask.height() {
            let row: Vec<String> = (0..mask.width())
                .map(|x| mask.at(x, y).to_string())
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sample_mask() -> DepthMask {
        DepthMask::new(3, 2, vec![0, 10, 255, 300, 0, 7]).unwrap()
    }

    #[test]
    fn ascii_round_trip() {
        let mask = sample_mask();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &mask, false).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("P2\n3 2\n300\n"));
        let back = read_pgm(Cursor::new(buf)).unwrap();
        assert_eq!(back, mask);
    }

    #[test]
    fn binary_round_trip_8_and_16_bit() {
        let mask = sample_mask(); // maxval 300 -> 16-bit samples
        let mut buf = Vec::new();
        write_pgm(&mut buf, &mask, true).unwrap();
        assert_eq!(read_pgm(Cursor::new(buf)).unwrap(), mask);

        let small = DepthMask::new(2, 2, vec![0, 1, 2, 200]).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &small, true).unwrap();
        assert_eq!(read_pgm(Cursor::new(buf)).unwrap(), small);
    }

    #[test]
    fn reads_comments_and_odd_whitespace() {
        let text = "P2 # magic\n# full line comment\n 3\t2\n255\n0 10 255\n255 0 7\n";
        let mask = read_pgm(Cursor::new(text.as_bytes())).unwrap();
        assert_eq!(mask.width(), 3);
        assert_eq!(mask.at(0, 1), 255);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(matches!(
            read_pgm(Cursor::new(b"P6 2 2 255 aaaa".as_slice())),
            Err(PgmError::BadMagic(_))
        ));
        assert!(matches!(
            read_pgm(Cursor::new(b"P2\n2 2\n255\n1 2 3".as_slice())),
            Err(PgmError::Truncated)
        ));
        assert!(matches!(
            read_pgm(Cursor::new(b"P2\n2 1\n10\n5 11".as_slice())),
            Err(PgmError::SampleOutOfRange { .. })
        ));
    }
}
