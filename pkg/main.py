"""Entry point for the stochastic Volterra toolkit."""

from volterra_paths.cli import main

if __name__ == "__main__":
    main()
