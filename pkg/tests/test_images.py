import json
import os

import numpy as np
import pytest

from tangent_images.errors import (
    AspectError,
    BitDepthError,
    EncodeRangeError,
    InvalidArgumentError,
    MetaFormatError,
    MissingFaceError,
    UnreadableFileError,
)
from tangent_images.images import (
    ChannelSemantics,
    EquirectImage,
    decode_samples,
    encode_samples,
    load_equirect,
    load_tangent_set,
    save_equirect,
    save_tangent_set,
    tangent_set_meta,
)
from tangent_images.resample import to_tangent


def test_color8_quantization_rules():
    sem = ChannelSemantics("color8")
    assert encode_samples(np.array([0.5]), sem)[0] == 128  # round half up
    assert decode_samples(np.array([128], dtype=np.uint8), sem)[0] == 128 / 255
    assert encode_samples(np.array([0.0, 1.0]), sem).tolist() == [0, 255]
    with pytest.raises(EncodeRangeError):
        encode_samples(np.array([1.2]), sem)
    with pytest.raises(EncodeRangeError):
        encode_samples(np.array([np.nan]), sem)


def test_label8_exactness():
    sem = ChannelSemantics("label8")
    vals = np.array([0.0, 7.0, 255.0])
    assert decode_samples(encode_samples(vals, sem), sem).tolist() == vals.tolist()
    with pytest.raises(EncodeRangeError):
        encode_samples(np.array([1.5]), sem)
    with pytest.raises(EncodeRangeError):
        encode_samples(np.array([300.0]), sem)


def test_depth16_scale_and_sentinel():
    sem = ChannelSemantics("depth16")
    assert decode_samples(np.array([512], dtype=np.uint16), sem)[0] == 1.0
    assert np.isnan(decode_samples(np.array([65535], dtype=np.uint16), sem))[0]
    enc = encode_samples(np.array([1.0, np.nan]), sem)
    assert enc.tolist() == [512, 65535]
    with pytest.raises(EncodeRangeError):
        encode_samples(np.array([-0.5]), sem)
    with pytest.raises(EncodeRangeError):
        encode_samples(np.array([1e6]), sem)


def test_equirect_image_validation():
    with pytest.raises(AspectError):
        EquirectImage(np.zeros((4, 9, 1)))
    img = EquirectImage(np.zeros((4, 8)))
    assert img.channels == 1
    assert img.source_level() == 1
    with pytest.raises(InvalidArgumentError):
        EquirectImage(np.zeros((6, 12, 1))).source_level()


@pytest.mark.parametrize("kind,channels", [
    ("color8", 3), ("color16", 3), ("label8", 1), ("depth16", 1)])
def test_png_round_trip(tmp_path, kind, channels, rng):
    sem = ChannelSemantics(kind)
    h, w = 8, 16
    if kind.startswith("color"):
        data = np.floor(rng.random((h, w, channels)) * sem.maxint) / sem.maxint
    elif kind == "label8":
        data = rng.integers(0, 13, size=(h, w, channels)).astype(float)
    else:
        data = rng.integers(0, 4000, size=(h, w, channels)).astype(float) / 512.0
        data[0, 0, 0] = np.nan
    img = EquirectImage(data, sem)
    path = str(tmp_path / f"{kind}.png")
    save_equirect(img, path)
    loaded = load_equirect(path, sem)
    if kind == "depth16":
        assert np.isnan(loaded.samples[0, 0, 0])
        mask = ~np.isnan(data)
        assert np.array_equal(loaded.samples[mask], data[mask])
    else:
        assert np.array_equal(loaded.samples, data)


def test_load_zero_image(tmp_path):
    img = EquirectImage(np.zeros((2, 4, 3)), ChannelSemantics("color8"))
    path = str(tmp_path / "z.png")
    save_equirect(img, path)
    loaded = load_equirect(path, ChannelSemantics("color8"))
    assert loaded.samples.shape == (2, 4, 3)
    assert np.all(loaded.samples == 0.0)


def test_load_errors(tmp_path):
    with pytest.raises(UnreadableFileError):
        load_equirect(str(tmp_path / "missing.png"), ChannelSemantics())
    bad = tmp_path / "junk.png"
    bad.write_bytes(b"this is not a png")
    with pytest.raises(UnreadableFileError):
        load_equirect(str(bad), ChannelSemantics())

    # Wrong aspect is its own failure mode.
    square = EquirectImage(np.zeros((4, 8, 1)), ChannelSemantics("label8"))
    path = str(tmp_path / "sq.png")
    save_equirect(square, path)
    import cv2
    cv2.imwrite(str(tmp_path / "bad_aspect.png"), np.zeros((5, 8), dtype=np.uint8))
    with pytest.raises(AspectError):
        load_equirect(str(tmp_path / "bad_aspect.png"), ChannelSemantics("label8"))

    # Bit depth mismatch: stored 8-bit read back as depth16.
    with pytest.raises(BitDepthError):
        load_equirect(path, ChannelSemantics("depth16"))


def _small_tangent_set(rng):
    img = EquirectImage(rng.random((8, 16, 3)), ChannelSemantics("color8"))
    # Snap to representable 8-bit values so disk round trips are exact.
    img.samples[:] = np.floor(img.samples * 255 + 0.5) / 255
    return to_tangent(img, 0, "bilinear", threads=1)


def test_tangent_set_meta_fields(rng):
    tset = _small_tangent_set(rng)
    meta = tangent_set_meta(tset)
    assert set(meta) == {"base_level", "source_level", "dim", "interp",
                         "channel_semantics", "faces"}
    assert meta["base_level"] == 0 and meta["source_level"] == 2
    assert meta["dim"] == 4 and meta["interp"] == "bilinear"
    assert len(meta["faces"]) == 20
    assert set(meta["faces"][0]) == {"center_lat_deg", "center_lon_deg",
                                     "half_extent"}


def test_tangent_set_dir_round_trip(tmp_path, rng):
    tset = _small_tangent_set(rng)
    # Quantize in memory so the PNG round trip is lossless to compare.
    from tangent_images.images import decode_samples, encode_samples
    tset.images = decode_samples(encode_samples(tset.images, tset.semantics),
                                 tset.semantics)
    out = str(tmp_path / "tset")
    save_tangent_set(tset, out)
    names = sorted(os.listdir(out))
    assert names[0] == "face_00000.png" and "meta.json" in names
    loaded = load_tangent_set(out)
    assert np.array_equal(loaded.images, tset.images)
    assert loaded.base_level == 0 and loaded.dim == 4
    for a, b in zip(loaded.specs, tset.specs):
        assert a.center.lat == pytest.approx(b.center.lat, abs=1e-12)
        assert a.half_extent == pytest.approx(b.half_extent, rel=1e-12)


def test_tangent_set_missing_face(tmp_path, rng):
    tset = _small_tangent_set(rng)
    out = str(tmp_path / "tset")
    save_tangent_set(tset, out)
    os.remove(os.path.join(out, "face_00007.png"))
    with pytest.raises(MissingFaceError) as exc:
        load_tangent_set(out)
    assert "face_00007.png" in str(exc.value)


def test_tangent_set_meta_mismatch(tmp_path, rng):
    tset = _small_tangent_set(rng)
    out = str(tmp_path / "tset")
    save_tangent_set(tset, out)
    meta_path = os.path.join(out, "meta.json")
    meta = json.load(open(meta_path))
    meta["dim"] = 8
    json.dump(meta, open(meta_path, "w"))
    with pytest.raises(MetaFormatError):
        load_tangent_set(out)
    os.remove(meta_path)
    with pytest.raises(MetaFormatError):
        load_tangent_set(out)
