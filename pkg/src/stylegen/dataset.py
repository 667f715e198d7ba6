"""
Synthetic multi-vendor benchmark: generation and on-disk layout.

Every sample owns a generator derived from (split seed, index), so a split is
reproducible sample by sample regardless of generation order.

On disk, each split directory holds ``NNNN.pgm`` (image, round(v·255)),
``NNNN_label.pgm`` (pixel = class id) and ``index.csv``
(filename,vendor,seed,phase).
"""

from pathlib import Path
from typing import Dict, List, Union

import pandas as pd
from tqdm import tqdm

from src.autodiff.rng import Rng, derive_seed
from src.config.settings import DatasetSpec
from src.models.sample import Dataset, Sample
from src.stylegen.anatomy import gen_content
from src.stylegen.vendors import render_vendor
from src.utils.file_utils import ensure_directory, load_csv, save_csv
from src.utils.logger import get_logger
from src.utils.pgm import image_to_pixels, pixels_to_image, read_pgm, write_pgm

logger = get_logger(__name__)

INDEX_FILE = "index.csv"
INDEX_COLUMNS = ["filename", "vendor", "seed", "phase"]
TRAIN, STYLE_POOL = "train", "style-pool"


def vendor_split(vendor: str) -> str:
    return f"test-{vendor}"


def split_seed(seed: int, split_key: int) -> int:
    return derive_seed(seed, "split", split_key)


def make_sample(spec: DatasetSpec, vendor: str, base_seed: int, index: int) -> Sample:
    """Generate sample ``index`` of a split; even indices are ED, odd are ES."""
    sample_rng = Rng(base_seed).child(index)
    phase = "ED" if index % 2 == 0 else "ES"
    label, _ = gen_content(sample_rng.child("content"), spec.image_size, phase)
    image = render_vendor(label, spec.vendor_styles[vendor], sample_rng.child("render"))
    return Sample(image=image, label=label, vendor=vendor, seed=sample_rng.seed, phase=phase)


def make_split(spec: DatasetSpec, split: str, vendors: List[str], base_seed: int,
               progress: bool = False) -> Dataset:
    """Generate one split; ``vendors`` gives the vendor of each index."""
    samples = [
        make_sample(spec, vendor, base_seed, index)
        for index, vendor in enumerate(tqdm(vendors, desc=split, disable=not progress, leave=False))
    ]
    return Dataset(split=split, samples=samples)


def make_dataset(spec: DatasetSpec, seed: int, progress: bool = False) -> Dict[str, Dataset]:
    """
    Generate every split of the benchmark.

    Args:
        spec: Split sizes, vendors and seeds
        seed: Global seed
        progress: Show a progress bar per split

    Returns:
        Split tag → Dataset (train, style-pool, test-<vendor>...)
    """
    train_vendors = [v for v in spec.train_vendors for _ in range(spec.train_per_vendor)]
    pool_vendors = [spec.style_pool_vendors[i % len(spec.style_pool_vendors)] for i in range(spec.style_pool_size)]

    datasets = {
        TRAIN: make_split(spec, TRAIN, train_vendors, split_seed(seed, spec.seeds.train), progress),
        STYLE_POOL: make_split(spec, STYLE_POOL, pool_vendors, split_seed(seed, spec.seeds.style_pool), progress),
    }
    for vendor in spec.test_vendors:
        base = derive_seed(split_seed(seed, spec.seeds.test), vendor)
        datasets[vendor_split(vendor)] = make_split(
            spec, vendor_split(vendor), [vendor] * spec.test_per_vendor, base, progress
        )

    for split, data in datasets.items():
        logger.debug(f"{split}: {len(data)} samples from vendors {data.vendors}")
    return datasets


def write_dataset(dataset: Dataset, split_dir: Union[Path, str]) -> Path:
    """
    Write one split as PGM files plus an index CSV.

    Args:
        dataset: Split to write
        split_dir: Destination directory (created if needed)

    Returns:
        Path of the index CSV
    """
    directory = ensure_directory(split_dir)
    rows = []
    for index, sample in enumerate(dataset):
        filename = f"{index:04d}.pgm"
        write_pgm(image_to_pixels(sample.image[0]), directory / filename)
        write_pgm(sample.label, directory / f"{index:04d}_label.pgm")
        rows.append({"filename": filename, "vendor": sample.vendor, "seed": str(sample.seed), "phase": sample.phase})
    return save_csv(pd.DataFrame(rows, columns=INDEX_COLUMNS), directory / INDEX_FILE)


def load_dataset(split_dir: Union[Path, str], split: str) -> Dataset:
    """
    Read a split written by write_dataset.

    Args:
        split_dir: Directory holding the split
        split: Split tag to assign

    Returns:
        Dataset with images quantised to 8 bits

    Raises:
        FileNotFoundError: If the index or any listed file is missing
    """
    directory = Path(split_dir)
    index = directory / INDEX_FILE
    if not index.exists():
        raise FileNotFoundError(f"❌ Dataset index not found: {index}\n   Run `main.py gen-data` first")
    table = load_csv(index, dtype={"filename": str, "vendor": str, "seed": str, "phase": str})

    samples = []
    for row in table.itertuples(index=False):
        stem = Path(row.filename).stem
        samples.append(Sample(
            image=pixels_to_image(read_pgm(directory / row.filename))[None],
            label=read_pgm(directory / f"{stem}_label.pgm"),
            vendor=row.vendor,
            seed=int(row.seed),
            phase=row.phase,
        ))
    return Dataset(split=split, samples=samples)
