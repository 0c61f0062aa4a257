# Copyright 2024 PGMVG developers

# Licensed under the Apache License, Version 2.0 (the "License"); you may not
# use this file except in compliance with the License. You may obtain a copy of
# the License at http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations under
# the License.


import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

LOG_FORMAT = "%(asctime)s: %(name)s: %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def configure_logging(verbose: bool = False, stream=None) -> logging.Handler:
    """Install a single timestamped handler on the package logger.

    Args:
        verbose (bool, optional): Log at DEBUG level instead of INFO.
            Defaults to False.
        stream (file-like, optional): Stream to write to. Defaults to
            standard error.

    Returns:
        logging.Handler: The installed handler.
    """
    logger = logging.getLogger("pgmvg")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    logger.propagate = False
    return handler


def generate_block_bounds(N: int, block_size: int) -> List[tuple]:
    """Split the range [0, N) into consecutive (start, stop) blocks.

    The split depends only on N and block_size, never on the number of
    workers, so blocked computations stay bitwise reproducible.

    Args:
        N (int): Length of the range to split
        block_size (int): Maximum number of elements per block

    Returns:
        list[tuple]: (start, stop) pairs covering [0, N) in order
    """

    if not isinstance(N, (int, np.integer)) or not isinstance(block_size, (int, np.integer)):
        raise ValueError("N and block_size must be integers")
    if N < 0 or block_size <= 0:
        raise ValueError("N must be non-negative and block_size greater than 0")

    starts = np.arange(0, N, block_size)
    return [(int(s), int(min(s + block_size, N))) for s in starts]


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Apply func to every item, optionally on a thread pool.

    Results are returned in input order regardless of the thread count.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))
