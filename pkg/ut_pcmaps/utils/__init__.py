"""
Утилиты для ut-pcmaps
"""

from ut_pcmaps.utils.helpers import field_from_order, parse_element, parse_order, seeded_rng, to_json

__all__ = ["field_from_order", "parse_element", "parse_order", "seeded_rng", "to_json"]
