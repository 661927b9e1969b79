"""Raster I/O: 8/16-bit PNG and little-endian PFM."""
from pathlib import Path

import cv2
import numpy as np

from .errors import DimensionError

CLASS_LEVELS = (0, 128, 255)  # stable, unstable, occluded


def read_color(path):
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise FileNotFoundError(f"cannot read image {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def write_color(path, img):
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionError(f"expected (H, W, 3), got {img.shape}")
    _imwrite(path, cv2.cvtColor(img, cv2.COLOR_RGB2BGR))


def read_gray(path):
    """Read an 8- or 16-bit single-channel PNG, keeping its integer dtype."""
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise FileNotFoundError(f"cannot read image {path}")
    if img.ndim == 3:
        img = cv2.cvtColor(img, cv2.COLOR_BGR2GRAY)
    return img


def write_gray(path, img):
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype not in (np.uint8, np.uint16):
        raise DimensionError("gray PNGs must be 2-D uint8 or uint16")
    _imwrite(path, img)


def _imwrite(path, img):
    if not cv2.imwrite(str(path), img):
        raise OSError(f"failed to write {path}")


def write_pfm(path, plane):
    """Write a single-channel PFM (little-endian, scale -1.0, bottom-up rows)."""
    plane = np.asarray(plane, dtype="<f4")
    if plane.ndim != 2:
        raise DimensionError(f"PFM writer expects a 2-D plane, got {plane.shape}")
    height, width = plane.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        f.write(np.ascontiguousarray(plane[::-1]).tobytes())


def read_pfm(path):
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header == b"PF":
            channels = 3
        elif header == b"Pf":
            channels = 1
        else:
            raise ValueError(f"{path} is not a PFM file")
        dims = f.readline().split()
        while not dims:
            dims = f.readline().split()
        width, height = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(f.read(), dtype=dtype, count=width * height * channels)
    shape = (height, width, channels) if channels == 3 else (height, width)
    return data.reshape(shape)[::-1].astype(np.float32)


def encode_disparity(disp):
    """16-bit disparity encoding: ``round(d * 256)``, 0 for invalid (negative) pixels."""
    disp = np.asarray(disp, dtype=np.float64)
    out = np.clip(np.round(disp * 256.0), 0, 65535).astype(np.uint16)
    out[disp < 0] = 0
    return out


def decode_disparity(png):
    png = np.asarray(png)
    disp = png.astype(np.float32) / 256.0
    disp[png == 0] = -1.0
    return disp


def write_disparity_png(path, disp):
    write_gray(path, encode_disparity(disp))


def read_disparity_png(path):
    return decode_disparity(read_gray(path))


def write_class_png(path, classes):
    write_gray(path, np.asarray(CLASS_LEVELS, dtype=np.uint8)[np.asarray(classes)])


def read_class_png(path):
    img = read_gray(path)
    classes = np.zeros(img.shape, dtype=np.uint8)
    classes[img == 128] = 1
    classes[img == 255] = 2
    return classes


def dump_cost_volume(directory, vol):
    """One PFM per disparity slice, named ``cost_d%03d.pfm``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for d in range(vol.shape[2]):
        write_pfm(directory / f"cost_d{d:03d}.pfm", vol[:, :, d])
