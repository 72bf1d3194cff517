from landauer.cli import main

main()
