# src/synth/__init__.py
from src.synth.generator import GroundTruth, sample_components, sample_mixtures, add_noise_quantize, generate_dataset
from src.synth.bundle import write_bundle, read_bundle

__all__ = ['GroundTruth', 'sample_components', 'sample_mixtures', 'add_noise_quantize',
           'generate_dataset', 'write_bundle', 'read_bundle']
