"""sbvsim test suite"""
