"""Accessory-image compositing onto base images.

An accessory raster (carrying transparency, or white-keyed into it) is
scaled so its area is at most a configured fraction of the base image area
(default 10%), placed uniformly at random fully in frame, and alpha
composited over the base. Placement is a pure function of the seed: the
generator is Python's Mersenne Twister (random.Random) seeded per example
with the first 8 bytes of SHA-256("<run_seed>:<example_id>"), so datasets
rebuild byte-identically.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
import random
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from PIL import Image

from .pairs import ConceptPairSpec

DEFAULT_MAX_AREA_FRACTION = 0.10
DEFAULT_WHITE_THRESHOLD = 245

MANIFEST_COLUMNS = [
    "example_id", "class_id", "class_name", "accessory", "pmi",
    "base_path", "out_path", "seed", "scale", "x", "y", "status",
]


@dataclass(frozen=True)
class EditSpec:
    """Realized parameters of one paste operation."""

    seed: int
    max_area_fraction: float
    scale: float
    x: int
    y: int
    width: int
    height: int
    base_image: str | None = None
    accessory_image: str | None = None


def white_to_alpha(image: Image.Image, threshold: int = DEFAULT_WHITE_THRESHOLD) -> Image.Image:
    """Make near-white pixels fully transparent, everything else fully opaque.

    A pixel is background when min(R, G, B) >= threshold. RGB values are
    preserved. This is the fallback for accessory images rendered on a
    plain white background when no real object mask is available.
    """
    rgb = np.asarray(image.convert("RGB"))
    alpha = np.where(rgb.min(axis=2) >= threshold, 0, 255).astype(np.uint8)
    return Image.fromarray(np.dstack([rgb, alpha]), "RGBA")


def ensure_alpha(image: Image.Image, threshold: int = DEFAULT_WHITE_THRESHOLD) -> Image.Image:
    """RGBA view of an accessory: keep real transparency, else key out white."""
    if image.mode in ("RGBA", "LA") or (
        image.mode == "P" and "transparency" in image.info
    ):
        return image.convert("RGBA")
    return white_to_alpha(image, threshold)


def paste_accessory(
    base: Image.Image,
    accessory: Image.Image,
    seed: int,
    max_area_fraction: float = DEFAULT_MAX_AREA_FRACTION,
) -> tuple[Image.Image, EditSpec]:
    """Scale, place, and alpha-composite an accessory over a base image.

    The accessory keeps its aspect ratio and is never upscaled; the scale
    factor is chosen so the pasted area is at most ``max_area_fraction`` of
    the base area and the accessory fits inside the frame. Scaled
    dimensions floor to integers; a dimension that floors to zero is an
    error. Pixels outside the placement rectangle are untouched.
    """
    if not 0.0 < max_area_fraction <= 1.0:
        raise ValueError("max_area_fraction must be in (0, 1]")
    base = base.convert("RGB")
    accessory = accessory.convert("RGBA")
    bw, bh = base.size
    aw, ah = accessory.size
    if bw == 0 or bh == 0 or aw == 0 or ah == 0:
        raise ValueError("base and accessory images must be non-empty")
    scale = min(
        1.0,
        math.sqrt(max_area_fraction * bw * bh / (aw * ah)),
        bw / aw,
        bh / ah,
    )
    width = math.floor(aw * scale)
    height = math.floor(ah * scale)
    if width < 1 or height < 1:
        raise ValueError(
            f"accessory {aw}x{ah} cannot fit {max_area_fraction:.0%} of a "
            f"{bw}x{bh} base at any representable scale"
        )
    if scale < 1.0:
        accessory = accessory.resize((width, height), Image.BILINEAR)
    rng = random.Random(seed)
    x = rng.randint(0, bw - width)
    y = rng.randint(0, bh - height)
    out = base.copy()
    region = out.crop((x, y, x + width, y + height)).convert("RGBA")
    composited = Image.alpha_composite(region, accessory)
    out.paste(composited.convert("RGB"), (x, y))
    spec = EditSpec(
        seed=seed,
        max_area_fraction=max_area_fraction,
        scale=scale,
        x=x,
        y=y,
        width=width,
        height=height,
    )
    return out, spec


def derive_seed(run_seed: int, example_id: str) -> int:
    digest = hashlib.sha256(f"{run_seed}:{example_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class PasteResult:
    manifest_path: str
    rows: list[dict]
    generated: int
    skipped: int
    failed: int


def build_paste_dataset(
    pairs: Iterable[ConceptPairSpec],
    base_index: dict[str, list[str]],
    accessory_index: dict[str, str],
    seed: int,
    out_dir: str,
    max_area_fraction: float = DEFAULT_MAX_AREA_FRACTION,
    bases_per_pair: int = 1,
    white_threshold: int = DEFAULT_WHITE_THRESHOLD,
) -> PasteResult:
    """Composite one edited image per (pair, sampled base image).

    Resumable: rows already present in the manifest whose output file still
    exists are skipped. Missing assets produce an error row and the run
    continues. The manifest is rewritten in full by a single writer.
    """
    images_dir = os.path.join(out_dir, "images")
    os.makedirs(images_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "manifest.csv")
    done: dict[str, dict] = {}
    if os.path.exists(manifest_path):
        with open(manifest_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                if row["status"] == "ok" and os.path.exists(row["out_path"]):
                    done[row["example_id"]] = row

    rows: list[dict] = []
    generated = skipped = failed = 0
    for pair in pairs:
        base_paths = base_index.get(pair.class_concept) or []
        for k in range(bases_per_pair):
            example_id = f"{pair.class_concept}-{pair.accessory}-{k:03d}"
            if example_id in done:
                rows.append(done[example_id])
                skipped += 1
                continue
            row = {
                "example_id": example_id,
                "class_id": pair.class_id or "",
                "class_name": pair.class_concept,
                "accessory": pair.accessory,
                "pmi": "" if pair.pmi is None else repr(pair.pmi),
                "base_path": "",
                "out_path": "",
                "seed": "",
                "scale": "",
                "x": "",
                "y": "",
                "status": "",
            }
            accessory_path = accessory_index.get(pair.accessory)
            if not base_paths:
                row["status"] = "error:missing-base"
                rows.append(row)
                failed += 1
                continue
            if accessory_path is None:
                row["status"] = "error:missing-accessory"
                rows.append(row)
                failed += 1
                continue
            example_seed = derive_seed(seed, example_id)
            picker = random.Random(derive_seed(seed, example_id + ":base"))
            base_path = picker.choice(base_paths)
            out_path = os.path.join(images_dir, f"{example_id}.png")
            try:
                with Image.open(base_path) as base_img:
                    base_img = base_img.convert("RGB")
                with Image.open(accessory_path) as acc_img:
                    acc_img = ensure_alpha(acc_img, white_threshold)
                edited, spec = paste_accessory(
                    base_img, acc_img, example_seed, max_area_fraction
                )
                edited.save(out_path, format="PNG")
            except (OSError, ValueError) as exc:
                row["status"] = f"error:{exc}"
                rows.append(row)
                failed += 1
                continue
            row.update(
                base_path=base_path,
                out_path=out_path,
                seed=str(example_seed),
                scale=repr(spec.scale),
                x=str(spec.x),
                y=str(spec.y),
                status="ok",
            )
            rows.append(row)
            generated += 1

    tmp_path = manifest_path + ".tmp"
    with open(tmp_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    os.replace(tmp_path, manifest_path)
    return PasteResult(
        manifest_path=manifest_path,
        rows=rows,
        generated=generated,
        skipped=skipped,
        failed=failed,
    )
