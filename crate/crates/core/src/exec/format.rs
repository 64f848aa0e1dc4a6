//! Bit-exact file formats for executed outputs.
//!
//! * Layout: binary PPM (`P6`, 64×64, maxval 255).
//! * CSG2D: binary PGM (`P5`, 64×64, maxval 255), occupied cells are 255.
//! * CSG3D: the ASCII bytes `VOX1` followed by 32768 bytes, one per voxel,
//!   0 or 1, x fastest then y then z.

use thiserror::Error;

use super::{Canvas, Color, Grid, Visual, SIZE_2D, SIZE_3D};
use crate::dsl::Domain;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad header: {0}")]
    Header(String),
    #[error("expected {expected} payload bytes, found {found}")]
    Size { expected: usize, found: usize },
    #[error("pixel {index} has color {rgb:?} outside the layout palette")]
    Palette { index: usize, rgb: [u8; 3] },
}

const VOX_MAGIC: &[u8; 4] = b"VOX1";

fn rgb(c: Color) -> [u8; 3] {
    match c {
        Color::Background => [255, 255, 255],
        Color::Red => [255, 0, 0],
        Color::Green => [0, 255, 0],
        Color::Blue => [0, 0, 255],
        Color::Gray => [128, 128, 128],
    }
}

pub fn file_extension(domain: Domain) -> &'static str {
    match domain {
        Domain::Layout => "ppm",
        Domain::Csg2d => "pgm",
        Domain::Csg3d => "vox",
    }
}

pub fn encode_visual(v: &Visual) -> Vec<u8> {
    match v {
        Visual::Layout(c) => {
            let mut out = format!("P6\n{SIZE_2D} {SIZE_2D}\n255\n").into_bytes();
            for p in c.cells() {
                out.extend_from_slice(&rgb(*p));
            }
            out
        }
        Visual::Csg2d(g) => {
            let mut out = format!("P5\n{SIZE_2D} {SIZE_2D}\n255\n").into_bytes();
            out.extend(g.cells().iter().map(|&b| if b { 255u8 } else { 0 }));
            out
        }
        Visual::Csg3d(g) => {
            let mut out = VOX_MAGIC.to_vec();
            out.extend(g.cells().iter().map(|&b| u8::from(b)));
            out
        }
    }
}

/// Reads a netpbm header, returning (magic, width, height, maxval, payload offset).
fn netpbm_header(bytes: &[u8]) -> Result<(String, usize, usize, usize, usize), FormatError> {
    let mut fields = Vec::new();
    let mut i = 0;
    while fields.len() < 4 {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(FormatError::Header("truncated header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    // exactly one whitespace byte separates the header from the payload
    i += 1;
    let num = |s: &str| s.parse::<usize>().map_err(|_| FormatError::Header(format!("bad number `{s}`")));
    Ok((fields[0].clone(), num(&fields[1])?, num(&fields[2])?, num(&fields[3])?, i))
}

pub fn decode_visual(bytes: &[u8], domain: Domain) -> Result<Visual, FormatError> {
    match domain {
        Domain::Csg3d => {
            if bytes.len() < 4 || &bytes[..4] != VOX_MAGIC {
                return Err(FormatError::Header("missing VOX1 magic".into()));
            }
            let payload = &bytes[4..];
            let n = SIZE_3D.pow(3);
            if payload.len() != n {
                return Err(FormatError::Size { expected: n, found: payload.len() });
            }
            Ok(Visual::Csg3d(Grid::from_cells(SIZE_3D, 3, payload.iter().map(|b| *b != 0).collect())))
        }
        Domain::Layout | Domain::Csg2d => {
            let (magic, w, h, maxval, offset) = netpbm_header(bytes)?;
            let want = if domain == Domain::Layout { "P6" } else { "P5" };
            if magic != want || w != SIZE_2D || h != SIZE_2D || maxval != 255 {
                return Err(FormatError::Header(format!(
                    "expected {want} {SIZE_2D}x{SIZE_2D} maxval 255, found {magic} {w}x{h} maxval {maxval}"
                )));
            }
            let payload = bytes.get(offset..).unwrap_or_default();
            let channels = if domain == Domain::Layout { 3 } else { 1 };
            let n = SIZE_2D * SIZE_2D * channels;
            if payload.len() != n {
                return Err(FormatError::Size { expected: n, found: payload.len() });
            }
            if domain == Domain::Csg2d {
                return Ok(Visual::Csg2d(Grid::from_cells(SIZE_2D, 2, payload.iter().map(|b| *b >= 128).collect())));
            }
            let palette = [Color::Background, Color::Red, Color::Green, Color::Blue, Color::Gray];
            let cells = payload
                .chunks_exact(3)
                .enumerate()
                .map(|(index, px)| {
                    let px = [px[0], px[1], px[2]];
                    palette
                        .iter()
                        .copied()
                        .find(|c| rgb(*c) == px)
                        .ok_or(FormatError::Palette { index, rgb: px })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Visual::Layout(Canvas::from_cells(cells)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_are_exact() {
        let ppm = encode_visual(&Visual::blank(Domain::Layout));
        assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
        assert_eq!(ppm.len(), 13 + 64 * 64 * 3);
        let pgm = encode_visual(&Visual::blank(Domain::Csg2d));
        assert!(pgm.starts_with(b"P5\n64 64\n255\n"));
        assert_eq!(pgm.len(), 13 + 64 * 64);
        let vox = encode_visual(&Visual::blank(Domain::Csg3d));
        assert_eq!(&vox[..4], b"VOX1");
        assert_eq!(vox.len(), 4 + 32768);
    }

    #[test]
    fn voxel_order_is_x_fastest() {
        let mut g = Grid::empty_3d();
        g.set(&[1, 0, 0], true);
        g.set(&[0, 0, 1], true);
        let bytes = encode_visual(&Visual::Csg3d(g.clone()));
        assert_eq!(bytes[4 + 1], 1);
        assert_eq!(bytes[4 + 32 * 32], 1);
        assert_eq!(decode_visual(&bytes, Domain::Csg3d).unwrap(), Visual::Csg3d(g));
    }

    #[test]
    fn off_palette_pixel_is_rejected() {
        let mut ppm = encode_visual(&Visual::blank(Domain::Layout));
        let n = ppm.len();
        ppm[n - 1] = 7;
        assert!(matches!(decode_visual(&ppm, Domain::Layout), Err(FormatError::Palette { .. })));
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n64 64\n255\n".to_vec();
        bytes.extend(std::iter::repeat_n(0u8, 64 * 64));
        assert!(decode_visual(&bytes, Domain::Csg2d).is_ok());
    }
}
