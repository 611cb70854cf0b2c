"""simplicialdb: a categorical database engine.

Schemas are finite labeled semi-simplicial sets; data is a sheaf of keys
with a typed record map; queries are limits and colimits of databases.
"""

__version__ = "0.1.0"
