"""
Dataset commands: synthetic benchmark generation and batch enhancement.
"""
import argparse
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from tqdm import tqdm

from src.commands.options import add_config_option, resolve_config
from src.config import (
    DEFAULT_SCENE_SIZE,
    DEFAULT_SOURCE_COUNT,
    DEFAULT_SYNTH_SEED,
    DEFAULT_TARGET_COUNT,
    MAX_WORKERS,
    SHOW_PROGRESS,
)
from src.data.dataset import list_images
from src.data.synth import SceneSpec, gen_dataset
from src.errors import DataFileError
from src.imaging.codec import read_image, write_image
from src.learning.train_config import config_to_mapping
from src.manifest import MANIFEST_NAME, RunManifest
from src.visibility.boost import BoostResult, VbmConfig, boost_with_stats

logger = logging.getLogger(__name__)

ENHANCE_COLUMNS = ('file', 'night', 'mean_sat_before', 'mean_sat_after', 'omega_s',
                   'light_r', 'light_g', 'light_b')


def synth_command(args: argparse.Namespace) -> int:
    """Generate the synthetic normal-to-adverse benchmark."""
    spec = SceneSpec(height=args.size, width=args.size)
    settings = {
        'seed': str(args.seed),
        'source_count': str(args.source_count),
        'target_count': str(args.target_count),
        'size': str(args.size),
    }
    RunManifest('synth', settings, args.seed).write(args.out / MANIFEST_NAME)
    rows = gen_dataset(spec, args.source_count, args.target_count, args.out, args.seed)
    print(f"Wrote {len(rows)} files to {args.out}")
    return 0


def _enhance_one(path: Path, cfg: VbmConfig) -> BoostResult:
    return boost_with_stats(read_image(path), cfg)


def enhance_command(args: argparse.Namespace) -> int:
    """Boost every image of a directory (or one image) and tabulate the boost statistics."""
    cfg = resolve_config(args.config, gamma=args.gamma, patch_radius=args.radius,
                         night_luminance_threshold=args.night_thresh)
    paths = list_images(args.input)
    RunManifest('enhance', config_to_mapping(cfg), cfg.seed).write(args.out / MANIFEST_NAME)

    with ThreadPoolExecutor(max_workers=MAX_WORKERS) as pool:
        results = list(tqdm(pool.map(lambda p: _enhance_one(p, cfg.vbm), paths),
                            total=len(paths), desc='enhance', disable=not SHOW_PROGRESS))

    rows = []
    for path, result in zip(paths, results):
        write_image(args.out / path.name, result.image)
        rows.append([path.name, str(int(result.night)), repr(result.mean_sat_before),
                     repr(result.mean_sat_after), repr(result.omega_s),
                     repr(result.light.r), repr(result.light.g), repr(result.light.b)])
    table = args.out / 'enhance.csv'
    try:
        with open(table, 'w', newline='') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(ENHANCE_COLUMNS)
            writer.writerows(rows)
    except OSError as exc:
        raise DataFileError(f"Cannot write {table}: {exc}") from exc

    nights = sum(r.night for r in results)
    print(f"Enhanced {len(results)} images ({nights} through the inverse switch) into {args.out}")
    return 0


def setup_data_commands(subparsers) -> None:
    """
    Register the synth and enhance commands.

    Args:
        subparsers: The CLI's subparser collection
    """
    synth = subparsers.add_parser('synth', help='generate the synthetic benchmark')
    synth.add_argument('--out', type=Path, required=True, help='output directory')
    synth.add_argument('--seed', type=int, default=DEFAULT_SYNTH_SEED)
    synth.add_argument('--source-count', '--source-n', dest='source_count', type=int,
                       default=DEFAULT_SOURCE_COUNT)
    synth.add_argument('--target-count', '--target-n', dest='target_count', type=int,
                       default=DEFAULT_TARGET_COUNT)
    synth.add_argument('--size', type=int, default=DEFAULT_SCENE_SIZE, help='scene height and width')
    synth.set_defaults(handler=synth_command)

    enhance = subparsers.add_parser('enhance', help='visibility-boost a directory of images')
    enhance.add_argument('--in', '--input', dest='input', type=Path, required=True,
                         help='directory of .ppm images, or a single .ppm file')
    enhance.add_argument('--out', type=Path, required=True, help='output directory')
    enhance.add_argument('--gamma', type=float, help='saturation modulation strength')
    enhance.add_argument('--radius', type=int, help='min-filter patch radius')
    enhance.add_argument('--night-thresh', dest='night_thresh', type=float,
                         help='mean luminance below which an image counts as night')
    add_config_option(enhance)
    enhance.set_defaults(handler=enhance_command)
