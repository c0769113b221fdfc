#!/usr/bin/env python3
"""Render every figure preset into an output directory.

Plane presets become PGM rasters (plus SVG when --svg is given); torus
presets become ascii PLY point clouds.  Depths can be scaled down for a
quick look with --fast.
"""

import argparse
import time
from pathlib import Path

from padic_fractal.render import (
    RasterConfig,
    auto_viewport,
    build_cloud,
    export_ply,
    preset,
    preset_names,
    rasterize,
    to_svg,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("--size", type=int, default=900, help="raster width/height")
    ap.add_argument("--fast", action="store_true", help="shallower depths")
    ap.add_argument("--svg", action="store_true", help="also emit SVG for plane presets")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in preset_names():
        fp = preset(name)
        depth = max(4, fp.depth - 3) if args.fast else fp.depth
        t0 = time.time()
        cloud = build_cloud(fp, depth=depth)
        if fp.kind == "plane":
            cfg = RasterConfig(
                width=args.size, height=args.size, viewport=auto_viewport(cloud.values)
            )
            (out / f"{name}.pgm").write_bytes(rasterize(cloud, cfg))
            if args.svg:
                (out / f"{name}.svg").write_bytes(to_svg(cloud, cfg))
        else:
            (out / f"{name}.ply").write_bytes(export_ply(cloud))
        print(f"{name}: {len(cloud)} points in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
