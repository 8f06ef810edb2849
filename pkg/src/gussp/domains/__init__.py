"""Benchmark domains: grid navigation, rover sampling, search and rescue,
and EV charging, plus the text instance format shared by all of them."""

from .ev import EvParams, build_ev, synthesize_ev_params
from .grid import GridParams, build_grid, line4, random_grid
from .io import (
    build_model,
    instance_digest,
    load_instance,
    parse_instance,
    save_instance,
    serialize_instance,
)
from .priors import PriorSpec
from .rover import RoverParams, build_rover, clustered_rover, random_rover
from .search_rescue import SearchRescueParams, build_search_rescue

__all__ = [
    "EvParams",
    "GridParams",
    "PriorSpec",
    "RoverParams",
    "SearchRescueParams",
    "build_ev",
    "build_grid",
    "build_model",
    "build_rover",
    "build_search_rescue",
    "instance_digest",
    "line4",
    "load_instance",
    "parse_instance",
    "random_grid",
    "clustered_rover",
    "random_rover",
    "save_instance",
    "serialize_instance",
    "synthesize_ev_params",
]
