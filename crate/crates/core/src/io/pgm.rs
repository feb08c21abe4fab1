//! Sparsity-pattern image as a binary portable graymap (P5).

use std::io::{self, Write};

use crate::sparse::CsrMatrix;

/// Writes the pattern of `a` downsampled to at most `max_pixels` per side.
/// Black pixels mark blocks containing at least one stored nonzero.
pub fn write_pattern(w: &mut impl Write, a: &CsrMatrix, max_pixels: usize) -> io::Result<()> {
    let max_pixels = max_pixels.max(1);
    let height = a.nrows().clamp(1, max_pixels);
    let width = a.ncols().clamp(1, max_pixels);
    let mut img = vec![255u8; width * height];
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let py = i * height / a.nrows().max(1);
        for (j, v) in cols.iter().zip(vals) {
            if *v != 0.0 {
                let px = j * width / a.ncols().max(1);
                img[py * width + px] = 0;
            }
        }
    }
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(&img)
}
