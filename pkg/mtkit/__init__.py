"""mtkit: sistemas de Malmquist-Takenaka en el círculo unitario"""

__version__ = "1.0.0"
