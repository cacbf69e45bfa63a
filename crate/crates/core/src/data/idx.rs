use std::fs;
use std::path::Path;

use super::{Dataset, Targets};
use crate::error::{read_file, Error, Result};
use crate::numerics::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;
const LABEL_CLASSES: usize = 10;

/// Raw unsigned-byte image stack, row-major per image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    /// Flattened images scaled to `[0, 1]`, one per row.
    pub fn to_matrix(&self) -> Matrix {
        let data = self.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
        Matrix::from_vec(self.count, self.pixels_per_image(), data).expect("pixel count checked at parse time")
    }
}

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, offset: usize, reason: impl Into<String>) -> Error {
        Error::Idx {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            reason: reason.into(),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let end = self.offset + 4;
        let chunk = self
            .bytes
            .get(self.offset..end)
            .ok_or_else(|| self.err(self.offset, format!("truncated while reading {what}")))?;
        let v = u32::from_be_bytes(chunk.try_into().expect("4-byte slice"));
        self.offset = end;
        Ok(v)
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let found = self.u32("magic number")?;
        if found != expected {
            return Err(self.err(0, format!("magic 0x{found:08x}, expected 0x{expected:08x}")));
        }
        Ok(())
    }

    fn payload(&mut self, len: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.offset;
        if available < len {
            return Err(self.err(
                self.bytes.len(),
                format!("truncated payload: need {len} bytes after header, found {available}"),
            ));
        }
        let out = &self.bytes[self.offset..self.offset + len];
        self.offset += len;
        Ok(out)
    }
}

pub fn parse_idx_images(path: &Path, bytes: &[u8]) -> Result<IdxImages> {
    let mut r = Reader { path, bytes, offset: 0 };
    r.magic(IMAGES_MAGIC)?;
    let count = r.u32("image count")? as usize;
    let rows = r.u32("row count")? as usize;
    let cols = r.u32("column count")? as usize;
    let pixels = r.payload(count * rows * cols)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u8>> {
    let mut r = Reader { path, bytes, offset: 0 };
    r.magic(LABELS_MAGIC)?;
    let count = r.u32("label count")? as usize;
    let header = r.offset;
    let labels = r.payload(count)?.to_vec();
    if let Some(pos) = labels.iter().position(|&l| usize::from(l) >= LABEL_CLASSES) {
        return Err(r.err(
            header + pos,
            format!("label {} outside 0..{LABEL_CLASSES}", labels[pos]),
        ));
    }
    Ok(labels)
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    let path = path.as_ref();
    parse_idx_images(path, &read_file(path)?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    parse_idx_labels(path, &read_file(path)?)
}

/// Images scaled to `[0, 1]` and flattened row-major, labels `0..10`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.count != labels.len() {
        return Err(Error::invalid(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    Dataset::new(
        images.to_matrix(),
        Targets::Classes {
            labels: labels.into_iter().map(usize::from).collect(),
            classes: LABEL_CLASSES,
        },
    )
}

/// Dataset from the selected images only, so large files never need a full
/// floating-point copy.
pub fn idx_subset(images: &IdxImages, labels: &[u8], indices: &[usize]) -> Result<Dataset> {
    if images.count != labels.len() {
        return Err(Error::invalid(format!(
            "{} images but {} labels",
            images.count,
            labels.len()
        )));
    }
    let width = images.pixels_per_image();
    let mut data = Vec::with_capacity(indices.len() * width);
    let mut picked = Vec::with_capacity(indices.len());
    for &i in indices {
        if i >= images.count {
            return Err(Error::invalid(format!(
                "image index {i} out of range ({})",
                images.count
            )));
        }
        data.extend(
            images.pixels[i * width..(i + 1) * width]
                .iter()
                .map(|&p| f64::from(p) / 255.0),
        );
        picked.push(usize::from(labels[i]));
    }
    Dataset::new(
        Matrix::from_vec(indices.len(), width, data)?,
        Targets::Classes {
            labels: picked,
            classes: LABEL_CLASSES,
        },
    )
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &IdxImages) -> Result<()> {
    if images.pixels.len() != images.count * images.pixels_per_image() {
        return Err(Error::invalid("pixel buffer does not match count x rows x cols"));
    }
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IMAGES_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path, out)?;
    Ok(())
}
