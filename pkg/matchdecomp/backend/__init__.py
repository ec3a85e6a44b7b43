"""Módulos do matchdecomp: núcleo de grafos, solvers, amostradores, motor E-FCFW e harness."""
