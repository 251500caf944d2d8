"""2-isogeny descent for Ivorra's curves y^2 = x^3 + a x^2 + b x and Watkins-style twist certification."""
__version__ = "0.1.0"
