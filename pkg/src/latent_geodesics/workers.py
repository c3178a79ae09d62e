"""
Pool de workers pour les résolutions indépendantes.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Iterable, List, Optional, TypeVar

# Configurer le logger
logger = logging.getLogger("latent_geodesics")

T = TypeVar("T")
R = TypeVar("R")


def default_threads() -> int:
    """Nombre de workers par défaut (variable LATENT_GEODESICS_THREADS, sinon 1)."""
    value = os.environ.get("LATENT_GEODESICS_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        logger.warning(f"LATENT_GEODESICS_THREADS invalide ({value!r}), utilisation de 1 worker")
        return 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Applique fn à chaque élément, éventuellement en parallèle.

    Les résultats sont renvoyés dans l'ordre des éléments, quel que soit
    l'ordre de terminaison. La première exception est propagée.
    """
    items = list(items)
    threads = threads or default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    results: List[Optional[R]] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = {executor.submit(fn, item): index for index, item in enumerate(items)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results  # type: ignore[return-value]
