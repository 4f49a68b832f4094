//! Codec boundary: lossless PNG and baseline JPEG behind a swappable
//! trait so the attack suite can reuse the exact same encode/decode path.

use std::io::Cursor;
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::image::RasterImage;

pub trait Codec {
    fn encode(&self, img: &RasterImage) -> Result<Vec<u8>>;
    fn decode(&self, bytes: &[u8]) -> Result<RasterImage>;
}

/// Lossless 8-bit PNG.
pub struct PngCodec;

/// Baseline JPEG at a fixed quality in `1..=100`.
pub struct JpegCodec {
    pub quality: u8,
}

impl JpegCodec {
    pub fn new(quality: u8) -> Result<Self> {
        if !(1..=100).contains(&quality) {
            return Err(CoreError::Codec(format!("jpeg quality {quality} outside 1..=100")));
        }
        Ok(Self { quality })
    }
}

fn to_dynamic(img: &RasterImage) -> Result<image::DynamicImage> {
    let (w, h) = (img.width as u32, img.height as u32);
    let quant = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    match img.channels {
        1 => {
            let buf = image::GrayImage::from_raw(w, h, img.data.iter().map(|&v| quant(v)).collect())
                .ok_or_else(|| CoreError::Codec("buffer size mismatch".into()))?;
            Ok(image::DynamicImage::ImageLuma8(buf))
        }
        3 => {
            let buf = image::RgbImage::from_raw(w, h, img.data.iter().map(|&v| quant(v)).collect())
                .ok_or_else(|| CoreError::Codec("buffer size mismatch".into()))?;
            Ok(image::DynamicImage::ImageRgb8(buf))
        }
        c => Err(CoreError::Codec(format!("unsupported channel count {c}"))),
    }
}

fn from_dynamic(dynimg: image::DynamicImage) -> RasterImage {
    match dynimg {
        image::DynamicImage::ImageLuma8(buf) => RasterImage {
            width: buf.width() as usize,
            height: buf.height() as usize,
            channels: 1,
            data: buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        },
        other => {
            let buf = other.into_rgb8();
            RasterImage {
                width: buf.width() as usize,
                height: buf.height() as usize,
                channels: 3,
                data: buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
            }
        }
    }
}

impl Codec for PngCodec {
    fn encode(&self, img: &RasterImage) -> Result<Vec<u8>> {
        let dynimg = to_dynamic(img)?;
        let mut bytes = Vec::new();
        dynimg
            .write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
            .map_err(|e| CoreError::Codec(e.to_string()))?;
        Ok(bytes)
    }

    fn decode(&self, bytes: &[u8]) -> Result<RasterImage> {
        let dynimg = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
            .map_err(|e| CoreError::Codec(e.to_string()))?;
        Ok(from_dynamic(dynimg))
    }
}

impl Codec for JpegCodec {
    fn encode(&self, img: &RasterImage) -> Result<Vec<u8>> {
        let dynimg = to_dynamic(img)?;
        let mut bytes = Vec::new();
        let mut cur = Cursor::new(&mut bytes);
        let enc = image::codecs::jpeg::JpegEncoder::new_with_quality(&mut cur, self.quality);
        dynimg
            .write_with_encoder(enc)
            .map_err(|e| CoreError::Codec(e.to_string()))?;
        Ok(bytes)
    }

    fn decode(&self, bytes: &[u8]) -> Result<RasterImage> {
        let dynimg = image::load_from_memory_with_format(bytes, image::ImageFormat::Jpeg)
            .map_err(|e| CoreError::Codec(e.to_string()))?;
        Ok(from_dynamic(dynimg))
    }
}

/// Decode any supported container (PNG or JPEG) by sniffing the signature.
pub fn read_image(path: &Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path)?;
    let dynimg =
        image::load_from_memory(&bytes).map_err(|e| CoreError::Codec(e.to_string()))?;
    Ok(from_dynamic(dynimg))
}

/// Write a lossless PNG.
pub fn write_png(path: &Path, img: &RasterImage) -> Result<()> {
    let bytes = PngCodec.encode(img)?;
    std::fs::write(path, bytes)?;
    Ok(())
}
