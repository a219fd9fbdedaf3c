"""Link-level simulator for dual-polarized LoS MIMO millimeter-wave backhaul."""

__version__ = "0.1.0"
