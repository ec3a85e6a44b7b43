"""Pacote matchdecomp: decomposição esparsa de grafos ponderados em matchings."""
