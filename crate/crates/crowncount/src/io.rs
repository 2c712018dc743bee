//! PNG reading and writing for images, masks, maps and annotations.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crowncount_core::features::FeatureStack;
use crowncount_core::imaging::{BinaryMask, LabelMap, RasterImage};
use crowncount_core::seed::mix64;
use crowncount_core::segmentation::{AnnotationMask, ProbabilityMap};
use image::{ExtendedColorType, ImageFormat};

use crate::{Error, Result};

/// Palette of annotation PNGs: unlabeled, tree, non-tree.
pub const ANNOTATION_PALETTE: [[u8; 3]; 3] = [[0, 0, 0], [0, 255, 0], [255, 0, 255]];

pub fn load_image(path: &Path) -> Result<RasterImage> {
    let img = image::open(path)
        .map_err(|e| Error::format(path, e))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img.pixels().map(|p| p.0).collect();
    Ok(RasterImage::new(w, h, pixels)?)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn save_buffer(
    path: &Path,
    bytes: &[u8],
    w: usize,
    h: usize,
    color: ExtendedColorType,
) -> Result<()> {
    ensure_parent(path)?;
    image::save_buffer_with_format(path, bytes, w as u32, h as u32, color, ImageFormat::Png)
        .map_err(|e| Error::format(path, e))
}

pub fn save_image(path: &Path, image: &RasterImage) -> Result<()> {
    let bytes: Vec<u8> = image.pixels().iter().flatten().copied().collect();
    save_buffer(
        path,
        &bytes,
        image.width(),
        image.height(),
        ExtendedColorType::Rgb8,
    )
}

/// Foreground 255, background 0.
pub fn save_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let bytes: Vec<u8> = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    save_buffer(
        path,
        &bytes,
        mask.width(),
        mask.height(),
        ExtendedColorType::L8,
    )
}

/// Gray level round(255·p).
pub fn save_probability(path: &Path, map: &ProbabilityMap) -> Result<()> {
    let bytes: Vec<u8> = map
        .values()
        .iter()
        .map(|&p| (255.0 * p).round() as u8)
        .collect();
    save_buffer(
        path,
        &bytes,
        map.width(),
        map.height(),
        ExtendedColorType::L8,
    )
}

/// Each label gets a hashed colour; lines and background are black.
pub fn save_labels(path: &Path, labels: &LabelMap) -> Result<()> {
    let bytes: Vec<u8> = labels
        .labels()
        .iter()
        .flat_map(|&l| {
            if l == 0 {
                [0, 0, 0]
            } else {
                let h = mix64(u64::from(l)).to_le_bytes();
                [h[0] | 0x40, h[1] | 0x40, h[2] | 0x40]
            }
        })
        .collect();
    save_buffer(
        path,
        &bytes,
        labels.width(),
        labels.height(),
        ExtendedColorType::Rgb8,
    )
}

/// Each plane stretched to its own range, written as `<index>_<name>.png`.
pub fn save_feature_planes(dir: &Path, stack: &FeatureStack) -> Result<()> {
    for (i, (name, plane)) in stack.names().iter().zip(stack.planes()).enumerate() {
        let (lo, hi) = plane.range();
        let span = if hi > lo { hi - lo } else { 1.0 };
        let bytes: Vec<u8> = plane
            .values()
            .iter()
            .map(|&v| (255.0 * (v - lo) / span).round() as u8)
            .collect();
        save_buffer(
            &dir.join(format!("{i:02}_{name}.png")),
            &bytes,
            plane.width(),
            plane.height(),
            ExtendedColorType::L8,
        )?;
    }
    Ok(())
}

/// Indexed PNG whose palette indices are the marks.
pub fn save_annotation(path: &Path, mask: &AnnotationMask) -> Result<()> {
    ensure_parent(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(
        BufWriter::new(file),
        mask.width() as u32,
        mask.height() as u32,
    );
    enc.set_color(png::ColorType::Indexed);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_palette(ANNOTATION_PALETTE.concat());
    let mut writer = enc.write_header().map_err(|e| Error::format(path, e))?;
    writer
        .write_image_data(mask.marks())
        .map_err(|e| Error::format(path, e))?;
    writer.finish().map_err(|e| Error::format(path, e))
}

/// Reads raw palette indices of an indexed PNG, or the values of an 8-bit
/// grayscale PNG. Every value must be 0, 1 or 2.
pub fn load_annotation(path: &Path) -> Result<AnnotationMask> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut dec = png::Decoder::new(BufReader::new(file));
    dec.set_transformations(png::Transformations::IDENTITY);
    let mut reader = dec.read_info().map_err(|e| Error::format(path, e))?;
    let (color, depth) = reader.output_color_type();
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "image too large"))?;
    let mut buf = vec![0; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, e))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let bits = match (color, depth) {
        (png::ColorType::Indexed, d) | (png::ColorType::Grayscale, d @ png::BitDepth::Eight) => {
            d as usize
        }
        other => {
            return Err(Error::format(
                path,
                format!("annotation must be indexed or 8-bit gray, got {other:?}"),
            ))
        }
    };
    if bits > 8 {
        return Err(Error::format(path, "16-bit annotations are not supported"));
    }
    let mut marks = Vec::with_capacity(w * h);
    for row in buf[..frame.buffer_size()].chunks(frame.line_size).take(h) {
        for x in 0..w {
            let bit = x * bits;
            let byte = row[bit / 8];
            let shift = 8 - bits - bit % 8;
            marks.push((byte >> shift) & ((1u16 << bits) - 1) as u8);
        }
    }
    AnnotationMask::new(w, h, marks).map_err(|e| Error::format(path, e))
}
