"""coinseg: prototype-neuron image segmentation on multiset similarity.

The pieces, bottom to top:

* :mod:`coinseg.similarity`  scalar similarity indices over nonnegative vectors
* :mod:`coinseg.imagekit`    images, masks, color conversion, cross morphology
* :mod:`coinseg.segmenter`   feature windows, neuron banks, scoring, masks
* :mod:`coinseg.synthgen`    seeded synthetic benchmark samples
* :mod:`coinseg.evalsweep`   balanced accuracy, sweeps, grid search, benchmarks
* :mod:`coinseg.cli`         the `coinseg` command
* :mod:`coinseg.service`     local HTTP API for the browser UI
"""

from .imagekit import RasterImage
from .segmenter import NeuronBank, PrototypeNeuron, SegmenterConfig
from .similarity import coincidence, interiority, jaccard
from .synthgen import SynthConfig, SynthSample

__version__ = "0.1.0"

__all__ = [
    "RasterImage",
    "NeuronBank",
    "PrototypeNeuron",
    "SegmenterConfig",
    "SynthConfig",
    "SynthSample",
    "jaccard",
    "interiority",
    "coincidence",
    "__version__",
]
