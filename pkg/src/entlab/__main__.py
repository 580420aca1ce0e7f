from .scenario_cli import main

main()
