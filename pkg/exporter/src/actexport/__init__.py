"""Activation and transferred-attack exporters for the similarity pipeline."""

from .attacks import ATTACKS, export_attack_results, write_rows
from .hooks import ExportJob, collect_activations, export_activations
from .models import build_model

__version__ = "0.1.0"
