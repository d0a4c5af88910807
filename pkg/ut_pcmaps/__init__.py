"""
ut-pcmaps - точная арифметика в UT(n, F_q) и классификация отображений, сохраняющих коммутаторы
"""

from ut_pcmaps.core.toolkit import PCMapToolkit

__version__ = "1.0.0"
__all__ = ["PCMapToolkit"]
